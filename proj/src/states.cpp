#include "semiclass/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cctype>
#include <regex>
#include <sstream>

#include "semiclass/errors.hpp"
#include "semiclass/fft.hpp"

namespace semiclass {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes on [-1, 1] (Golub-Welsch).
const std::vector<std::pair<double, double>>& legendre_nodes() {
    static const std::vector<std::pair<double, double>> nodes = [] {
        const int n = 400;
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
        std::vector<std::pair<double, double>> r;
        for (int i = 0; i < n; ++i)
            r.emplace_back(es.eigenvalues()[i], 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i));
        return r;
    }();
    return nodes;
}

double bump(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

// L^2-normalized 1-d bump and its unitary Fourier transform.
double bump_norm() {
    static const double n = [] {
        double s = 0.0;
        for (const auto& [t, w] : legendre_nodes()) s += w * bump(t) * bump(t);
        return std::sqrt(s);
    }();
    return n;
}

double bump_hat(double zeta) {
    double s = 0.0;
    for (const auto& [t, w] : legendre_nodes()) s += w * bump(t) * std::cos(t * zeta);
    return s / (bump_norm() * std::sqrt(2.0 * kPi));
}

double bump_cutoff() {
    static const double z = [] {
        const double step = 0.05, zmax = 600.0;
        std::vector<double> dens;
        for (double x = 0.0; x <= zmax; x += step) dens.push_back(bump_hat(x) * bump_hat(x));
        double tail = 0.0;
        for (size_t i = dens.size(); i-- > 0;) {
            tail += 2.0 * step * dens[i];
            if (tail > 1e-12) return static_cast<double>(i + 1) * step;
        }
        return zmax;
    }();
    return z;
}

void check_integer(double v, const std::string& what) {
    if (std::abs(v - std::round(v)) > 1e-9) throw InvalidRecipe(what + " must be an integer, got " + std::to_string(v));
}

Eigen::VectorXd zeros_if_empty(const Eigen::VectorXd& v, int d) { return v.size() == 0 ? Eigen::VectorXd::Zero(d) : v; }

}  // namespace

// ---------------------------------------------------------------- power laws

double PowerLaw::at(double h) const { return coeff * std::pow(h, exponent); }

PowerLaw PowerLaw::parse(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    static const std::regex pat(R"(^(?:([-+0-9.eE]+)\*?)?h\^\(?([-+0-9.eE/]+)\)?$)");
    std::smatch m;
    if (s == "1/h") return {1.0, -1.0};
    if (std::regex_match(s, m, pat)) {
        PowerLaw p;
        p.coeff = m[1].matched ? std::stod(m[1].str()) : 1.0;
        p.exponent = to_double(parse_rational(m[2].str()));
        return p;
    }
    if (s == "h") return {1.0, 1.0};
    try {
        size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size()) return {v, 0.0};
    } catch (const std::exception&) {
    }
    throw ConfigError("cannot parse power law '" + raw + "'");
}

std::string PowerLaw::str() const {
    std::ostringstream os;
    os << coeff << "*h^" << exponent;
    return os.str();
}

// ---------------------------------------------------------------- profiles

double ProfileSpec::fourier_axis(int i, double zeta) const {
    const double s = scale(i);
    if (kind == Kind::Gaussian) return std::pow(kPi, -0.25) * std::sqrt(s) * std::exp(-0.5 * s * s * zeta * zeta);
    return std::sqrt(s) * bump_hat(s * zeta);
}

double ProfileSpec::fourier(const Eigen::VectorXd& zeta) const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < zeta.size(); ++i) v *= fourier_axis(static_cast<int>(i), zeta[i]);
    return v;
}

double ProfileSpec::momentum_cutoff() const { return kind == Kind::Gaussian ? 6.5 : bump_cutoff(); }

// ---------------------------------------------------------------- coherent states

FourierState coherent_state(const CoherentParams& p, double h, const std::optional<FourierGrid>& grid) {
    const int d = static_cast<int>(p.xi0.size());
    if (d < 1 || d > kMaxDim) throw InvalidRecipe("xi0 dimension out of range");
    if (!(p.eps >= h)) throw InvalidRecipe("coherent state needs eps >= h");
    const Eigen::VectorXd x0 = zeros_if_empty(p.x0, d);
    if (!p.profile.scales.empty() && static_cast<int>(p.profile.scales.size()) != d)
        throw InvalidRecipe("profile scales have wrong length");
    const Eigen::VectorXd c = p.xi0 / h;
    IVec center(d);
    int need = 1;
    for (int i = 0; i < d; ++i) {
        center[i] = std::llround(c[i]);
        need = std::max(need, static_cast<int>(std::ceil(p.profile.momentum_cutoff() / (p.eps * p.profile.scale(i)))) + 1);
    }
    FourierGrid g = grid ? *grid : FourierGrid(d, need + p.padding, h, center);
    if (g.dim != d) throw ShapeError("grid dimension differs from xi0");
    for (int i = 0; i < d; ++i) {
        if (std::abs(center[i] - g.center[i]) + need > g.radius)
            throw TruncationError("grid radius " + std::to_string(g.radius) + " too small for momentum width, need " +
                                  std::to_string(need + std::abs(center[i] - g.center[i])));
    }
    FourierState u(g);
    // Separable: tabulate the per-axis factors.
    std::vector<std::vector<cd>> axis(d);
    for (int i = 0; i < d; ++i) {
        axis[i].resize(2 * g.radius + 1);
        for (int m = -g.radius; m <= g.radius; ++m) {
            const double off = static_cast<double>(g.center[i] + m) - c[i];
            axis[i][m + g.radius] =
                std::sqrt(p.eps) * p.profile.fourier_axis(i, p.eps * off) * std::polar(1.0, -off * x0[i]);
        }
    }
    for (long long i = 0; i < g.size(); ++i) {
        const IVec k = g.mode(i);
        cd v = 1.0;
        for (int j = 0; j < d && v != cd(0.0); ++j) v *= axis[j][k[j] - g.center[j] + g.radius];
        u.coeffs()[i] = v;
    }
    u.prenormalization_norm = u.norm();
    u.normalize();
    return u;
}

FourierState modulated_coherent_state(CoherentParams p, const Eigen::VectorXd& eta0, double tau, double h,
                                      const std::optional<FourierGrid>& grid) {
    if (eta0.size() != p.xi0.size()) throw ShapeError("eta0 dimension differs from xi0");
    if (!(tau > 0)) throw InvalidRecipe("tau must be positive");
    p.xi0 = p.xi0 + eta0 / tau;
    return coherent_state(p, h, grid);
}

FourierState plane_wave(const FourierGrid& grid, const IVec& k) {
    FourierState u(grid);
    u.set(k, 1.0);
    return u;
}

double smooth_cutoff(double t, double inner, double outer) {
    const double a = std::abs(t);
    if (a <= inner) return 1.0;
    if (a >= outer) return 0.0;
    const double s = (a - inner) / (outer - inner);
    auto f = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    return f(1.0 - s) / (f(1.0 - s) + f(s));
}

double wunsch_potential(const Eigen::VectorXd& x) { return 2.0 * (1.0 - std::cos(x[1])); }

// ---------------------------------------------------------------- special states

FourierState special_state(const std::string& kind, const SpecialParams& p, double h) {
    if (kind == "lagrangian_diag") {
        // Periodized (2 pi h)^{-1/2} rho((x1 - x2)/h): Fourier support k = (m, -m)
        // with u^(m, -m) = h^{1/2} rho^(h m).
        ProfileSpec prof = p.profile;
        if (prof.scales.size() > 1) prof.scales.resize(1);
        const int n = static_cast<int>(std::ceil(prof.momentum_cutoff() / (h * prof.scale(0)))) + 1;
        FourierGrid g(2, n, h);
        FourierState u(g);
        Eigen::VectorXd z(1);
        for (int m = -n; m <= n; ++m) {
            z[0] = h * m;
            u.set({m, -m}, std::sqrt(h) * prof.fourier(z));
        }
        u.prenormalization_norm = u.norm();
        u.normalize();
        return u;
    }
    if (kind == "example3") {
        // Periodized (2 pi eps)^{-1/2} rho((x2 + x3)/eps) e^{i (alpha x1 + x2 + x3)/h}.
        if (!(p.eps_exponent > 0 && p.eps_exponent < 1)) throw InvalidRecipe("example3 needs eps exponent in (0,1)");
        check_integer(p.alpha / h, "alpha / h");
        check_integer(1.0 / h, "1 / h");
        const double eps = std::pow(h, p.eps_exponent);
        ProfileSpec prof = p.profile;
        if (prof.scales.size() > 1) prof.scales.resize(1);
        const long long k1 = std::llround(p.alpha / h), kc = std::llround(1.0 / h);
        const int n = static_cast<int>(std::ceil(prof.momentum_cutoff() / (eps * prof.scale(0)))) + 1;
        FourierGrid g(3, n, h, {k1, kc, kc});
        FourierState u(g);
        Eigen::VectorXd z(1);
        for (int m = -n; m <= n; ++m) {
            z[0] = eps * m;
            u.set({k1, kc + m, kc + m}, std::sqrt(eps) * prof.fourier(z));
        }
        u.prenormalization_norm = u.norm();
        u.normalize();
        return u;
    }
    if (kind == "wunsch") {
        if (!(p.eps_exponent > 0 && p.eps_exponent < 1)) throw InvalidRecipe("wunsch needs eps exponent in (0,1)");
        if (!(p.chi_inner > 0 && p.chi_outer > p.chi_inner && p.chi_outer < kPi))
            throw InvalidRecipe("wunsch cutoff radii must satisfy 0 < inner < outer < pi");
        check_integer(1.0 / h, "1 / h");
        const double var = std::pow(h, p.eps_exponent);
        // x2 profile g = e^{-x2^2 / (2 h^eps)} chi(x2), coefficients by DFT; modes below
        // the FFT noise floor are dropped.
        const int samples = 8192;
        std::vector<cd> buf(samples);
        for (int j = 0; j < samples; ++j) {
            double x = std::remainder(2 * kPi * j / samples, 2 * kPi);
            buf[j] = std::exp(-x * x / (2 * var)) * smooth_cutoff(x, p.chi_inner, p.chi_outer);
        }
        dft(buf, {samples}, -1);
        double peak = 0.0;
        for (const auto& c : buf) peak = std::max(peak, std::abs(c));
        int n = 1;
        for (int k = 1; k < samples / 2; ++k)
            if (std::norm(buf[k]) > 1e-26 * peak * peak) n = k;
        n += 1;
        const long long k1 = std::llround(1.0 / h);
        FourierGrid g(2, n, h, {k1, 0});
        FourierState u(g);
        for (int k = -n; k <= n; ++k) u.set({k1, k}, buf[(k + samples) % samples]);
        u.prenormalization_norm = u.norm();
        u.normalize();
        return u;
    }
    if (kind == "power_quasimode") {
        if (!(p.k >= 2)) throw InvalidRecipe("power_quasimode needs k >= 2");
        CoherentParams c;
        c.xi0 = Eigen::VectorXd::Zero(p.dim);
        c.x0 = zeros_if_empty(p.x0, p.dim);
        c.profile = p.profile;
        const double tau = std::pow(h, -p.tau_exponent);
        c.eps = p.eps_coeff * std::pow(tau * std::pow(h, p.k - 1), 1.0 / p.k);
        return coherent_state(c, h);
    }
    throw InvalidRecipe("unknown special state '" + kind + "'");
}

FourierState eigenfunction_cluster(double energy, const FourierGrid& grid, const HamiltonianModel& model,
                                   const std::map<IVec, cd>& coeffs, double rel_tol) {
    FourierState u(grid);
    const double tol = rel_tol * std::max(1.0, std::abs(energy));
    bool any = false;
    for (long long i = 0; i < grid.size(); ++i) {
        IVec k = grid.mode(i);
        if (std::abs(model.value(grid.h * to_eigen(k)) - energy) >= tol) continue;
        any = true;
        if (coeffs.empty()) {
            u.coeffs()[i] = 1.0;
        } else {
            auto it = coeffs.find(k);
            if (it != coeffs.end()) u.coeffs()[i] = it->second;
        }
    }
    if (!any) throw EmptyCluster("no grid mode at energy " + std::to_string(energy));
    for (const auto& [k, c] : coeffs) {
        if (c == cd(0.0)) continue;
        if (!grid.contains(k) || std::abs(model.value(grid.h * to_eigen(k)) - energy) >= tol)
            throw InvalidRecipe("supplied coefficient off the level set");
    }
    u.prenormalization_norm = u.norm();
    u.normalize();
    return u;
}

double tail_mass(const FourierState& u, double r) {
    const auto& g = u.grid();
    double s = 0.0;
    for (long long i = 0; i < g.size(); ++i) {
        if (u.coeffs()[i] == cd(0.0)) continue;
        if ((g.h * to_eigen(g.mode(i))).squaredNorm() >= r) s += std::norm(u.coeffs()[i]);
    }
    return s;
}

// ---------------------------------------------------------------- recipes

StateRecipe::Family StateRecipe::parse_family(const std::string& s) {
    static const std::map<std::string, Family> names{{"coherent", Family::Coherent},
                                                     {"modulated", Family::Modulated},
                                                     {"plane_wave", Family::PlaneWave},
                                                     {"lagrangian_diag", Family::LagrangianDiag},
                                                     {"example3", Family::Example3},
                                                     {"wunsch", Family::Wunsch},
                                                     {"power_quasimode", Family::PowerQuasimode},
                                                     {"cluster", Family::Cluster}};
    auto it = names.find(s);
    if (it == names.end()) throw ConfigError("unknown state family '" + s + "'");
    return it->second;
}

FourierState StateRecipe::build(double h, const HamiltonianModel* model) const {
    CoherentParams c;
    c.xi0 = zeros_if_empty(xi0, dim);
    c.x0 = zeros_if_empty(x0, dim);
    c.eps = eps.at(h);
    c.profile = profile;
    c.padding = padding;
    switch (family) {
        case Family::Coherent:
            return coherent_state(c, h);
        case Family::Modulated:
            return modulated_coherent_state(c, zeros_if_empty(eta0, dim), tau.at(h), h);
        case Family::PlaneWave: {
            IVec k(dim);
            for (int i = 0; i < dim; ++i) k[i] = std::llround(c.xi0[i] / h);
            return plane_wave(FourierGrid(dim, std::max(1, grid_radius), h, k), k);
        }
        case Family::LagrangianDiag:
            return special_state("lagrangian_diag", special, h);
        case Family::Example3:
            return special_state("example3", special, h);
        case Family::Wunsch:
            return special_state("wunsch", special, h);
        case Family::PowerQuasimode: {
            SpecialParams sp = special;
            sp.dim = dim;
            if (sp.x0.size() == 0) sp.x0 = c.x0;
            return special_state("power_quasimode", sp, h);
        }
        case Family::Cluster:
            if (!model) throw InvalidRecipe("cluster states need a Hamiltonian");
            return eigenfunction_cluster(energy, FourierGrid(dim, std::max(1, grid_radius), h), *model);
    }
    throw InvalidRecipe("unhandled state family");
}

std::vector<OscillationRow> oscillation_profile(const StateRecipe& recipe, const std::vector<double>& h_list,
                                                const std::vector<double>& r_list, const HamiltonianModel* model) {
    std::vector<OscillationRow> rows;
    for (double h : h_list) {
        FourierState u = recipe.build(h, model);
        for (double r : r_list) rows.push_back({h, r, tail_mass(u, r)});
    }
    return rows;
}

}  // namespace semiclass
