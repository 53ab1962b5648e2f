#include "semiclass/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "semiclass/errors.hpp"
#include "toml.hpp"

namespace semiclass {

namespace {

void check_keys(const toml::table& t, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [k, v] : t)
        if (!allowed.count(std::string(k.str())))
            throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where);
}

double number(const toml::node& n, const std::string& what) {
    if (auto v = n.as_integer()) return static_cast<double>(v->get());
    if (auto v = n.as_floating_point()) return v->get();
    if (auto v = n.as_string()) return parse_scale(v->get());
    throw ConfigError(what + " must be a number");
}

mpq_class rational(const toml::node& n, const std::string& what) {
    if (auto v = n.as_integer()) return mpq_class(static_cast<long>(v->get()));
    if (auto v = n.as_floating_point()) return to_rational_vector(Eigen::VectorXd::Constant(1, v->get()))[0];
    if (auto v = n.as_string()) return parse_rational(v->get());
    throw ConfigError(what + " must be a number or a rational string");
}

const toml::array& array(const toml::node& n, const std::string& what) {
    auto a = n.as_array();
    if (!a) throw ConfigError(what + " must be an array");
    return *a;
}

Eigen::VectorXd vec(const toml::node& n, const std::string& what) {
    const auto& a = array(n, what);
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(a[i], what);
    return v;
}

std::vector<double> list(const toml::node& n, const std::string& what) {
    Eigen::VectorXd v = vec(n, what);
    return {v.data(), v.data() + v.size()};
}

IVec ivec(const toml::node& n, const std::string& what) {
    const auto& a = array(n, what);
    IVec v;
    for (const auto& e : a) {
        auto i = e.as_integer();
        if (!i) throw ConfigError(what + " must hold integers");
        v.push_back(i->get());
    }
    return v;
}

std::string str(const toml::node& n, const std::string& what) {
    auto s = n.as_string();
    if (!s) throw ConfigError(what + " must be a string");
    return s->get();
}

long long integer(const toml::node& n, const std::string& what) {
    auto i = n.as_integer();
    if (!i) throw ConfigError(what + " must be an integer");
    return i->get();
}

const toml::table& table(const toml::node& n, const std::string& what) {
    auto t = n.as_table();
    if (!t) throw ConfigError(what + " must be a table");
    return *t;
}

PowerLaw power_law(const toml::node& n, const std::string& what) {
    if (auto s = n.as_string()) return PowerLaw::parse(s->get());
    return {number(n, what), 0.0};
}

cd complex_value(const toml::node& n, const std::string& what) {
    if (auto a = n.as_array()) {
        if (a->size() != 2) throw ConfigError(what + " must be a number or [re, im]");
        return {number((*a)[0], what), number((*a)[1], what)};
    }
    return number(n, what);
}

StateRecipe state_from(const toml::table& t) {
    check_keys(t,
               {"family", "dim", "x0", "xi0", "eta0", "eps", "tau", "profile", "scales", "energy", "grid_radius",
                "padding", "eps_exponent", "alpha", "k", "tau_exponent", "eps_coeff", "chi_inner", "chi_outer"},
               "[state]");
    StateRecipe r;
    if (!t.contains("family")) throw ConfigError("state needs a family");
    r.family = StateRecipe::parse_family(str(*t.get("family"), "state.family"));
    int dim = 0;
    if (auto n = t.get("x0")) r.x0 = vec(*n, "state.x0"), dim = static_cast<int>(r.x0.size());
    if (auto n = t.get("xi0")) r.xi0 = vec(*n, "state.xi0"), dim = static_cast<int>(r.xi0.size());
    if (auto n = t.get("eta0")) r.eta0 = vec(*n, "state.eta0");
    if (auto n = t.get("dim")) dim = static_cast<int>(integer(*n, "state.dim"));
    if (dim > 0) r.dim = dim;
    if (auto n = t.get("eps")) r.eps = power_law(*n, "state.eps");
    if (auto n = t.get("tau")) r.tau = power_law(*n, "state.tau");
    if (auto n = t.get("profile")) {
        std::string p = str(*n, "state.profile");
        if (p == "gaussian")
            r.profile.kind = ProfileSpec::Kind::Gaussian;
        else if (p == "compact_bump")
            r.profile.kind = ProfileSpec::Kind::CompactBump;
        else
            throw ConfigError("unknown profile '" + p + "'");
    }
    if (auto n = t.get("scales")) r.profile.scales = list(*n, "state.scales");
    r.special.profile = r.profile;
    if (auto n = t.get("energy")) r.energy = number(*n, "state.energy");
    if (auto n = t.get("grid_radius")) r.grid_radius = static_cast<int>(integer(*n, "state.grid_radius"));
    if (auto n = t.get("padding")) r.padding = static_cast<int>(integer(*n, "state.padding"));
    if (auto n = t.get("eps_exponent")) r.special.eps_exponent = number(*n, "state.eps_exponent");
    if (auto n = t.get("alpha")) r.special.alpha = number(*n, "state.alpha");
    if (auto n = t.get("k")) r.special.k = number(*n, "state.k");
    if (auto n = t.get("tau_exponent")) r.special.tau_exponent = number(*n, "state.tau_exponent");
    if (auto n = t.get("eps_coeff")) r.special.eps_coeff = number(*n, "state.eps_coeff");
    if (auto n = t.get("chi_inner")) r.special.chi_inner = number(*n, "state.chi_inner");
    if (auto n = t.get("chi_outer")) r.special.chi_outer = number(*n, "state.chi_outer");
    r.special.dim = r.dim;
    r.special.x0 = r.x0;
    return r;
}

SymbolTerm term_from(const toml::table& t, const std::string& where) {
    check_keys(t, {"k", "coeff", "shape", "xi", "eta"}, where);
    SymbolTerm s;
    if (!t.contains("k")) throw ConfigError(where + " needs k");
    s.k = ivec(*t.get("k"), where + ".k");
    if (auto n = t.get("coeff")) s.coeff = complex_value(*n, where + ".coeff");
    if (auto n = t.get("shape")) {
        std::string v = str(*n, where + ".shape");
        if (v == "exp")
            s.shape = SymbolTerm::Shape::Exp;
        else if (v == "cos")
            s.shape = SymbolTerm::Shape::Cos;
        else if (v == "sin")
            s.shape = SymbolTerm::Shape::Sin;
        else
            throw ConfigError("unknown term shape '" + v + "'");
    }
    if (auto n = t.get("xi")) {
        const auto& x = table(*n, where + ".xi");
        check_keys(x, {"kind", "center", "direction", "width"}, where + ".xi");
        std::string kind = x.contains("kind") ? str(*x.get("kind"), "xi.kind") : "one";
        if (kind == "one")
            s.xi.kind = XiFactor::Kind::One;
        else if (kind == "gaussian")
            s.xi.kind = XiFactor::Kind::Gaussian;
        else if (kind == "affine")
            s.xi.kind = XiFactor::Kind::Affine;
        else if (kind == "cos")
            s.xi.kind = XiFactor::Kind::Cosine;
        else
            throw ConfigError("unknown xi factor '" + kind + "'");
        if (auto c = x.get("center")) s.xi.center = vec(*c, "xi.center");
        if (auto c = x.get("direction")) s.xi.direction = vec(*c, "xi.direction");
        if (auto c = x.get("width")) s.xi.width = number(*c, "xi.width");
    }
    if (auto n = t.get("eta")) {
        const auto& e = table(*n, where + ".eta");
        check_keys(e, {"direction", "coeff"}, where + ".eta");
        if (auto c = e.get("direction")) s.eta.direction = vec(*c, "eta.direction");
        if (auto c = e.get("coeff")) s.eta.coeff = number(*c, "eta.coeff");
    }
    return s;
}

std::vector<SymbolTerm> terms_from(const toml::node& n, const std::string& where) {
    std::vector<SymbolTerm> out;
    for (const auto& e : array(n, where)) out.push_back(term_from(table(e, where), where));
    return out;
}

void add_to(TorusSymbol& a, const SymbolTerm& t, int d) {
    XiFunction g = t.xi.make(d);
    const cd c = t.coeff;
    XiFunction scaled = g ? XiFunction([g, c](const Eigen::VectorXd& xi) { return c * g(xi); })
                          : XiFunction([c](const Eigen::VectorXd&) { return c; });
    IVec neg = t.k;
    for (auto& v : neg) v = -v;
    switch (t.shape) {
        case SymbolTerm::Shape::Exp:
            a.add_term(t.k, 1.0, scaled);
            break;
        case SymbolTerm::Shape::Cos:
            a.add_term(t.k, 0.5, scaled).add_term(neg, 0.5, scaled);
            break;
        case SymbolTerm::Shape::Sin:
            a.add_term(t.k, cd(0, -0.5), scaled).add_term(neg, cd(0, 0.5), scaled);
            break;
    }
}

}  // namespace

double parse_scale(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    auto caret = s.find('^');
    try {
        if (caret != std::string::npos)
            return std::pow(std::stod(s.substr(0, caret)), to_double(parse_rational(s.substr(caret + 1))));
        if (s.find('/') != std::string::npos) return to_double(parse_rational(s));
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
    }
    throw ConfigError("cannot parse number '" + raw + "'");
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

HamiltonianModel HamiltonianSpec::build() const {
    if (family == "quadratic") {
        std::vector<RationalVector> a = matrix;
        if (a.empty()) {
            a.assign(dim, RationalVector(dim, mpq_class(0)));
            for (int i = 0; i < dim; ++i) a[i][i] = 1;
        }
        RationalVector th = theta.empty() ? RationalVector(a.size(), mpq_class(0)) : theta;
        return HamiltonianModel::quadratic(a, th);
    }
    if (family == "power") return HamiltonianModel::power(alpha, dim);
    if (family == "linear") return HamiltonianModel::linear(omega);
    if (family == "saddle2d") return HamiltonianModel::saddle2d();
    if (family == "cubic3d") return HamiltonianModel::cubic3d();
    throw ConfigError("unknown Hamiltonian family '" + family + "'");
}

XiFunction XiFactor::make(int d) const {
    auto fill = [d](const Eigen::VectorXd& v) { return v.size() ? v : Eigen::VectorXd::Zero(d); };
    const Eigen::VectorXd c = fill(center), v = fill(direction);
    const double w = width;
    switch (kind) {
        case Kind::One:
            return {};
        case Kind::Gaussian:
            return [c, w](const Eigen::VectorXd& xi) -> cd { return std::exp(-(xi - c).squaredNorm() / (w * w)); };
        case Kind::Affine:
            return [c, v](const Eigen::VectorXd& xi) -> cd { return v.dot(xi - c); };
        case Kind::Cosine:
            return [v](const Eigen::VectorXd& xi) -> cd { return std::cos(v.dot(xi)); };
    }
    return {};
}

TorusSymbol NamedSymbol::torus(int d) const {
    TorusSymbol a(d);
    for (const auto& t : terms) {
        if (static_cast<int>(t.k.size()) != d) throw ConfigError("symbol '" + name + "' has a mode of wrong dimension");
        add_to(a, t, d);
    }
    return a;
}

TwoMicroSymbol NamedSymbol::two_micro(const SubmoduleBasis& lambda, double r0) const {
    const int d = lambda.dim();
    TwoMicroSymbol a(lambda, r0);
    for (const auto& t : terms) {
        XiFunction g = t.xi.make(d);
        if (!g) g = [](const Eigen::VectorXd&) -> cd { return 1.0; };
        EtaFunction core, hom;
        if (t.eta.direction.size()) {
            const Eigen::VectorXd v = t.eta.direction;
            const double c = t.eta.coeff;
            core = [v, c, r0](const Eigen::VectorXd&, const Eigen::VectorXd& eta) -> cd {
                const double n = eta.norm();
                if (n == 0.0) return 1.0;
                return 1.0 + c * (v.dot(eta) / n) * (1.0 - smooth_cutoff(n, r0 / 4, r0 / 2));
            };
            hom = [v, c](const Eigen::VectorXd&, const Eigen::VectorXd& w) -> cd { return 1.0 + c * v.dot(w); };
        }
        IVec neg = t.k;
        for (auto& x : neg) x = -x;
        switch (t.shape) {
            case SymbolTerm::Shape::Exp:
                a.add_term(t.k, t.coeff, g, core, hom);
                break;
            case SymbolTerm::Shape::Cos:
                a.add_term(t.k, 0.5 * t.coeff, g, core, hom).add_term(neg, 0.5 * t.coeff, g, core, hom);
                break;
            case SymbolTerm::Shape::Sin:
                a.add_term(t.k, cd(0, -0.5) * t.coeff, g, core, hom).add_term(neg, cd(0, 0.5) * t.coeff, g, core, hom);
                break;
        }
    }
    return a;
}

SubmoduleBasis ExperimentConfig::lambda_basis() const {
    const int d = state.dim;
    if (lambda.empty()) return SubmoduleBasis::zero(d);
    std::vector<IntVector> cols;
    for (const auto& v : lambda) {
        if (static_cast<int>(v.size()) != d) throw ConfigError("lambda generator has wrong dimension");
        cols.push_back(to_int_vector(v));
    }
    return saturate(cols, d);
}

TorusSymbol ExperimentConfig::potential_symbol() const {
    NamedSymbol v{"potential", potential};
    return v.torus(state.dim);
}

std::optional<PotentialSpec> ExperimentConfig::potential_at(double h) const {
    if (potential.empty()) return std::nullopt;
    const double scale = potential_scale.at(h);
    NamedSymbol v{"potential", potential};
    for (auto& t : v.terms) t.coeff *= scale;
    return PotentialSpec::from_symbol(v.torus(state.dim));
}

StateRecipe parse_state_recipe(const std::string& text) {
    try {
        return state_from(toml::parse(text));
    } catch (const toml::parse_error& e) {
        throw ConfigError(std::string("TOML: ") + std::string(e.description()));
    }
}

ExperimentConfig parse_config(const std::string& text) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "TOML: " << e.description() << " at " << e.source().begin;
        throw ConfigError(os.str());
    }
    check_keys(root,
               {"command", "h_list", "tau", "betas", "times", "seed", "threads", "resolution", "hamiltonian", "state",
                "window", "panel", "potential", "orbit", "two_micro", "observability", "spacing", "counterexample"},
               "the top level");
    ExperimentConfig c;
    c.source = text;
    if (auto n = root.get("command")) c.command = str(*n, "command");
    if (auto n = root.get("h_list")) c.h_list = list(*n, "h_list");
    if (auto n = root.get("tau")) c.tau = power_law(*n, "tau");
    if (auto n = root.get("betas")) c.betas = list(*n, "betas");
    if (auto n = root.get("times")) c.times = list(*n, "times");
    if (auto n = root.get("seed")) c.seed = static_cast<std::uint64_t>(integer(*n, "seed"));
    if (auto n = root.get("threads")) c.threads = static_cast<int>(integer(*n, "threads"));
    if (auto n = root.get("resolution")) c.resolution = static_cast<int>(integer(*n, "resolution"));

    if (auto n = root.get("state")) c.state = state_from(table(*n, "[state]"));
    if (auto n = root.get("hamiltonian")) {
        const auto& t = table(*n, "[hamiltonian]");
        check_keys(t, {"family", "dim", "matrix", "theta", "alpha", "omega"}, "[hamiltonian]");
        auto& hs = c.hamiltonian;
        hs.dim = c.state.dim;
        if (auto v = t.get("family")) hs.family = str(*v, "hamiltonian.family");
        if (auto v = t.get("dim")) hs.dim = static_cast<int>(integer(*v, "hamiltonian.dim"));
        if (auto v = t.get("matrix")) {
            for (const auto& row : array(*v, "hamiltonian.matrix")) {
                RationalVector r;
                for (const auto& e : array(row, "hamiltonian.matrix row")) r.push_back(rational(e, "matrix entry"));
                hs.matrix.push_back(r);
            }
            hs.dim = static_cast<int>(hs.matrix.size());
        }
        if (auto v = t.get("theta"))
            for (const auto& e : array(*v, "hamiltonian.theta")) hs.theta.push_back(rational(e, "theta entry"));
        if (auto v = t.get("alpha")) hs.alpha = number(*v, "hamiltonian.alpha");
        if (auto v = t.get("omega")) hs.omega = vec(*v, "hamiltonian.omega"), hs.dim = static_cast<int>(hs.omega.size());
    } else {
        c.hamiltonian.dim = c.state.dim;
    }
    if (auto n = root.get("window")) {
        const auto& t = table(*n, "[window]");
        check_keys(t, {"t_a", "t_b", "samples", "shape", "dt"}, "[window]");
        if (auto v = t.get("t_a")) c.window.t_a = number(*v, "window.t_a");
        if (auto v = t.get("t_b")) c.window.t_b = number(*v, "window.t_b");
        if (auto v = t.get("samples")) c.window.samples = static_cast<int>(integer(*v, "window.samples"));
        if (auto v = t.get("dt")) c.window.dt = number(*v, "window.dt");
        if (auto v = t.get("shape")) {
            std::string s = str(*v, "window.shape");
            if (s == "box")
                c.window.shape = WindowShape::Box;
            else if (s == "gaussian")
                c.window.shape = WindowShape::Gaussian;
            else
                throw ConfigError("unknown window shape '" + s + "'");
        }
    }
    if (auto n = root.get("panel")) {
        for (const auto& e : array(*n, "panel")) {
            const auto& t = table(e, "[[panel]]");
            check_keys(t, {"name", "terms"}, "[[panel]]");
            NamedSymbol s;
            s.name = t.contains("name") ? str(*t.get("name"), "panel.name") : "a" + std::to_string(c.panel.size());
            if (!t.contains("terms")) throw ConfigError("panel symbol '" + s.name + "' has no terms");
            s.terms = terms_from(*t.get("terms"), "panel '" + s.name + "'");
            c.panel.push_back(std::move(s));
        }
    }
    if (auto n = root.get("potential")) {
        const auto& t = table(*n, "[potential]");
        check_keys(t, {"terms", "scale"}, "[potential]");
        if (auto v = t.get("terms")) c.potential = terms_from(*v, "potential");
        if (auto v = t.get("scale")) c.potential_scale = power_law(*v, "potential.scale");
        for (const auto& term : c.potential)
            if (term.xi.kind != XiFactor::Kind::One) throw ConfigError("potential terms must not depend on xi");
    }
    if (auto n = root.get("orbit")) {
        const auto& t = table(*n, "[orbit]");
        check_keys(t, {"detect", "ratio_min"}, "[orbit]");
        if (auto v = t.get("detect")) {
            const auto& d = table(*v, "orbit.detect");
            check_keys(d, {"qmax", "tol"}, "orbit.detect");
            DetectMode m;
            if (auto q = d.get("qmax")) m.qmax = static_cast<int>(integer(*q, "detect.qmax"));
            if (auto q = d.get("tol")) m.tol = number(*q, "detect.tol");
            c.detect = m;
        }
        if (auto v = t.get("ratio_min")) c.ratio_min = number(*v, "orbit.ratio_min");
    }
    if (auto n = root.get("two_micro")) {
        const auto& t = table(*n, "[two_micro]");
        check_keys(t, {"lambda", "xi0", "chart_radius", "r", "delta", "s", "r0", "bloch_radius", "step", "defect"}, "[two_micro]");
        if (auto v = t.get("lambda"))
            for (const auto& g : array(*v, "two_micro.lambda")) c.lambda.push_back(ivec(g, "lambda generator"));
        if (auto v = t.get("xi0")) c.chart_center = vec(*v, "two_micro.xi0");
        if (auto v = t.get("chart_radius")) c.chart_radius = number(*v, "two_micro.chart_radius");
        if (auto v = t.get("r")) c.cutoff_r = number(*v, "two_micro.r");
        if (auto v = t.get("delta")) c.cutoff_delta = number(*v, "two_micro.delta");
        if (auto v = t.get("s")) c.flow_s = number(*v, "two_micro.s");
        if (auto v = t.get("r0")) c.symbol_r0 = number(*v, "two_micro.r0");
        if (auto v = t.get("bloch_radius")) c.bloch_radius = static_cast<int>(integer(*v, "two_micro.bloch_radius"));
        if (auto v = t.get("step")) c.step = number(*v, "two_micro.step");
        if (auto v = t.get("defect")) c.defect = str(*v, "two_micro.defect");
        if (c.defect != "none" && c.defect != "sphere" && c.defect != "transport")
            throw ConfigError("two_micro.defect must be none, sphere or transport");
    }
    if (auto n = root.get("observability")) {
        const auto& t = table(*n, "[observability]");
        check_keys(t, {"boxes", "horizon", "chi_center", "chi_inner", "chi_outer", "draws", "adversarial"},
                   "[observability]");
        if (auto v = t.get("boxes"))
            for (const auto& b : array(*v, "observability.boxes")) {
                const auto& bt = table(b, "box");
                check_keys(bt, {"lo", "hi"}, "box");
                if (!bt.contains("lo") || !bt.contains("hi")) throw ConfigError("box needs lo and hi");
                c.region.push_back({vec(*bt.get("lo"), "box.lo"), vec(*bt.get("hi"), "box.hi")});
            }
        if (auto v = t.get("horizon")) c.horizon = number(*v, "observability.horizon");
        if (auto v = t.get("chi_center")) c.chi_center = vec(*v, "observability.chi_center");
        if (auto v = t.get("chi_inner")) c.chi_inner = number(*v, "observability.chi_inner");
        if (auto v = t.get("chi_outer")) c.chi_outer = number(*v, "observability.chi_outer");
        if (auto v = t.get("draws")) c.draws = static_cast<int>(integer(*v, "observability.draws"));
        if (auto v = t.get("adversarial"))
            for (const auto& s : array(*v, "observability.adversarial"))
                c.adversarial.push_back(state_from(table(s, "adversarial state")));
    }
    if (auto n = root.get("spacing")) {
        const auto& t = table(*n, "[spacing]");
        check_keys(t, {"xi_lo", "xi_hi", "tau_factor"}, "[spacing]");
        if (auto v = t.get("xi_lo")) c.xi_lo = vec(*v, "spacing.xi_lo");
        if (auto v = t.get("xi_hi")) c.xi_hi = vec(*v, "spacing.xi_hi");
        if (auto v = t.get("tau_factor")) c.tau_factor = number(*v, "spacing.tau_factor");
    }
    if (auto n = root.get("counterexample")) {
        const auto& t = table(*n, "[counterexample]");
        check_keys(t, {"case", "normal", "offset", "radius", "threshold"}, "[counterexample]");
        if (auto v = t.get("case")) c.case_name = str(*v, "counterexample.case");
        if (auto v = t.get("normal")) c.normal = ivec(*v, "counterexample.normal");
        if (auto v = t.get("offset")) c.offset = number(*v, "counterexample.offset");
        if (auto v = t.get("radius")) c.neighborhood = number(*v, "counterexample.radius");
        if (auto v = t.get("threshold")) c.threshold = number(*v, "counterexample.threshold");
    }

    for (size_t i = 0; i < c.h_list.size(); ++i) {
        if (!(c.h_list[i] > 0)) throw ConfigError("h values must be positive");
        if (i && !(c.h_list[i] < c.h_list[i - 1])) throw ConfigError("h_list must be strictly decreasing");
    }
    if (c.tau.exponent > 0) throw ConfigError("tau law h^-beta needs beta >= 0");
    for (double b : c.betas)
        if (b < 0) throw ConfigError("betas must be nonnegative");
    if (c.resolution < 2) throw ConfigError("resolution must be at least 2");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

}  // namespace semiclass
