#include "semiclass/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "semiclass/averaging.hpp"
#include "semiclass/errors.hpp"
#include "semiclass/limit.hpp"
#include "semiclass/parallel.hpp"
#include "semiclass/serialize.hpp"
#include "semiclass/twomicro.hpp"

namespace semiclass {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string clean(std::string s) {
    for (auto& ch : s)
        if (ch == ',' || ch == '\n' || ch == '"') ch = '_';
    return s;
}

Eigen::VectorXd or_zero(const Eigen::VectorXd& v, int d) { return v.size() ? v : Eigen::VectorXd::Zero(d); }

PotentialSpec potential(const ExperimentConfig& c, double h) {
    return c.potential_at(h).value_or(PotentialSpec::none());
}

FourierState evolve(const FourierState& u0, double s, const HamiltonianModel& model, const PotentialSpec& v,
                    double dt) {
    if (v.kind == PotentialSpec::Kind::None) return free_propagate(u0, s, model);
    return perturbed_propagate(u0, s, model, v, dt);
}

nlohmann::json window_json(const TimeWindow& w) {
    return {{"t_a", w.t_a},
            {"t_b", w.t_b},
            {"samples", w.samples},
            {"shape", w.shape == WindowShape::Box ? "box" : "gaussian"},
            {"dt", w.dt}};
}

SweepReport start(const ExperimentConfig& c, const std::string& command) {
    if (c.h_list.empty()) throw ConfigError("h_list is empty");
    SweepReport r;
    r.command = command;
    r.meta = {{"command", command},
              {"config_hash", config_hash(c.source)},
              {"version", kVersion},
              {"seed", c.seed},
              {"h_list", c.h_list},
              {"tau", c.tau.str()},
              {"window", window_json(c.window)},
              {"resolution", c.resolution}};
    return r;
}

// Runs f(i, rows) for every index in parallel and appends the rows in index order.
void fan_out(SweepReport& r, size_t n, const std::function<void(size_t, SweepReport&)>& f) {
    std::vector<SweepReport> parts(n);
    parallel_for(n, [&](size_t i) {
        parts[i].command = r.command;
        f(i, parts[i]);
    });
    for (auto& p : parts) {
        r.rows.insert(r.rows.end(), p.rows.begin(), p.rows.end());
        r.densities.insert(r.densities.end(), p.densities.begin(), p.densities.end());
    }
}

std::vector<TorusSymbol> torus_panel(const ExperimentConfig& c, int d) {
    if (c.panel.empty()) throw ConfigError("the symbol panel is empty");
    std::vector<TorusSymbol> out;
    for (const auto& s : c.panel) out.push_back(s.torus(d));
    return out;
}

// Panel weights are cut off by the chart window so that they vanish outside
// the chart domain.
std::vector<TwoMicroSymbol> two_micro_panel(const ExperimentConfig& c, const ChartF& chart) {
    if (c.panel.empty()) throw ConfigError("the symbol panel is empty");
    const auto cut = MWindow::for_chart(chart);
    std::vector<TwoMicroSymbol> out;
    for (const auto& s : c.panel) {
        TwoMicroSymbol raw;
        try {
            raw = s.two_micro(chart.lambda(), c.symbol_r0);
        } catch (const NotInSpan&) {
            throw ConfigError("panel symbol '" + s.name + "' has a mode outside Lambda");
        }
        TwoMicroSymbol a(raw.lambda(), raw.r0());
        for (auto m : raw.modes()) {
            auto w = m.weight;
            m.weight = [w, cut](const Eigen::VectorXd& xi) -> cd {
                const double v = cut(xi);
                return v == 0.0 ? cd(0.0) : v * w(xi);
            };
            a.add_mode(std::move(m));
        }
        out.push_back(std::move(a));
    }
    return out;
}

bool coherent_family(const StateRecipe& s) {
    return s.family == StateRecipe::Family::Coherent || s.family == StateRecipe::Family::Modulated;
}

double circular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), 2 * kPi);
    return std::min(d, 2 * kPi - d);
}

}  // namespace

// ---------------------------------------------------------------- report

void SweepReport::add(double h, double tau, const std::string& metric, double value) {
    rows.push_back({command, h, tau, metric, value});
}

std::optional<double> SweepReport::find(const std::string& metric, double h) const {
    for (const auto& r : rows)
        if (r.metric == metric && r.h == h) return r.value;
    return std::nullopt;
}

double SweepReport::get(const std::string& metric, double h) const {
    auto v = find(metric, h);
    if (!v) throw ShapeError("report has no metric '" + metric + "' at h = " + fmt(h));
    return *v;
}

std::string SweepReport::csv() const {
    std::string s = "command,h,tau,metric,value\n";
    for (const auto& r : rows)
        s += r.command + "," + fmt(r.h) + "," + fmt(r.tau) + "," + clean(r.metric) + "," + fmt(r.value) + "\n";
    return s;
}

std::string tagged(const std::string& metric, const std::string& key, double v) {
    return metric + "[" + key + "=" + short_fmt(v) + "]";
}

namespace {

void atomic_write(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace

void write_report(const SweepReport& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    atomic_write(base / "report.csv", r.csv());
    atomic_write(base / "meta.json", r.meta.dump(2) + "\n");
    for (const auto& d : r.densities) {
        auto path = base / ("density_" + short_fmt(d.h) + "_" + short_fmt(d.t) + ".csv");
        auto tmp = path;
        tmp += ".tmp";
        write_density_csv(tmp.string(), d.values, d.dim, d.resolution);
        std::filesystem::rename(tmp, path);
    }
}

double loglog_slope(const SweepReport& r, const std::string& metric) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& row : r.rows) {
        if (row.metric != metric || !(row.value > 0)) continue;
        const double x = std::log(row.h), y = std::log(row.value);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
        ++n;
    }
    if (n < 2) return std::nan("");
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::nan("");
    return (n * sxy - sx * sy) / den;
}

// ---------------------------------------------------------------- orbit convergence

SweepReport cmd_orbit_convergence(const ExperimentConfig& c) {
    SweepReport r = start(c, "orbit-convergence");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    const Eigen::VectorXd x0 = or_zero(c.state.x0, d), xi0 = or_zero(c.state.xi0, d);
    const auto spec = OrbitMeasureSpec::make(model, x0, xi0, c.detect);
    const auto panel = torus_panel(c, d);

    if (coherent_family(c.state)) {
        // eps_h >> h tau_h: the ratio must grow along the sweep and clear
        // ratio_min at the smallest h.
        double prev = 0.0;
        for (double h : c.h_list) {
            const double ratio = c.state.eps.at(h) / (h * c.tau.at(h));
            if (ratio <= prev) throw ConfigError("eps_h / (h tau_h) does not grow as h decreases");
            prev = ratio;
        }
        if (prev < c.ratio_min)
            throw ConfigError("eps_h / (h tau_h) = " + fmt(prev) + " at the smallest h is below " + fmt(c.ratio_min));
        r.meta["ratio_at_smallest_h"] = prev;
    }
    r.meta["tolerances"] = {{"ratio_min", c.ratio_min}};
    r.meta["lambda0"] = to_json(spec.lambda0);

    std::vector<double> targets;
    for (const auto& a : panel) targets.push_back(orbit_measure_pairing(spec, a));
    const Eigen::VectorXd v0 = model.evaluate(xi0).gradient;

    fan_out(r, c.h_list.size(), [&](size_t i, SweepReport& out) {
        const double h = c.h_list[i], tau = c.tau.at(h);
        const auto u0 = c.state.build(h, &model);
        const auto pot = potential(c, h);
        double e = 0.0;
        for (size_t j = 0; j < panel.size(); ++j) {
            const double v = time_averaged_pairing(u0, panel[j], model, pot, tau, c.window);
            const double err = std::abs(v - targets[j]);
            out.add(h, tau, "pairing[" + c.panel[j].name + "]", v);
            out.add(h, tau, "error[" + c.panel[j].name + "]", err);
            e = std::max(e, err);
        }
        out.add(h, tau, "e", e);
        out.add(h, tau, "lambda0_rank", spec.lambda0.rank());
        // Bounded times: the Dirac mass at x0 + tau t dH(xi0).
        if (c.tau.exponent == 0.0)
            for (double t : c.times) {
                const auto ut = evolve(u0, tau * t, model, pot, c.window.dt);
                const Eigen::VectorXd xt = x0 + tau * t * v0;
                double de = 0.0;
                for (const auto& a : panel)
                    de = std::max(de, std::abs(wigner_pairing(ut, a) - a.evaluate(xt, xi0).real()));
                out.add(h, tau, tagged("dirac_error", "t", t), de);
            }
    });
    const double slope = loglog_slope(r, "e");
    r.add(c.h_list.back(), c.tau.at(c.h_list.back()), "loglog_slope", slope);
    return r;
}

// ---------------------------------------------------------------- Dirac drift

SweepReport cmd_dirac_drift(const ExperimentConfig& c) {
    SweepReport r = start(c, "dirac-drift");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    const Eigen::VectorXd x0 = or_zero(c.state.x0, d), xi0 = or_zero(c.state.xi0, d);
    const Eigen::VectorXd eta0 = or_zero(c.state.eta0, d);
    const auto spec = OrbitMeasureSpec::make(model, x0, xi0, c.detect);
    const auto& lam = spec.lambda0;
    if (lam.rank() < 1 || lam.rank() > 2) throw ConfigError("drift needs a resonance lattice of rank 1 or 2");
    // eta0 in <Lambda0>, exactly: orthogonal to a rational basis of Lambda0^perp.
    const RationalVector eq = to_rational_vector(eta0);
    for (const auto& v : complement_data(lam).orth_basis) {
        mpq_class s = 0;
        for (int i = 0; i < d; ++i) s += v[i] * eq[i];
        if (s != 0) throw ConfigError("eta0 is not in the span of the resonance lattice");
    }
    if (c.times.empty()) throw ConfigError("dirac-drift needs times");
    const Eigen::MatrixXd b = lam.basis_matrix();
    const Eigen::MatrixXd hess = model.evaluate(xi0).hessian;
    const int res = c.resolution;
    const double cell = 2 * kPi / res;
    r.meta["lambda0"] = to_json(lam);
    r.meta["tolerances"] = {{"cell", cell}};

    StateRecipe recipe = c.state;
    recipe.tau = c.tau;
    const size_t nt = c.times.size();
    fan_out(r, c.h_list.size() * nt, [&](size_t idx, SweepReport& out) {
        const double h = c.h_list[idx / nt], t = c.times[idx % nt], tau = c.tau.at(h);
        const auto u0 = recipe.build(h, &model);
        const auto ut = evolve(u0, tau * t, model, potential(c, h), c.window.dt);
        const auto dens = lambda_averaged_density(ut, lam, res);
        const size_t best = static_cast<size_t>(std::max_element(dens.begin(), dens.end()) - dens.begin());
        const Eigen::VectorXd theta_pred = b.transpose() * (x0 + t * hess * eta0);
        double err = 0.0;
        std::vector<double> peak(lam.rank());
        size_t rest = best;
        for (int a = lam.rank() - 1; a >= 0; --a) {
            peak[a] = cell * static_cast<double>(rest % res);
            rest /= res;
        }
        for (int a = 0; a < lam.rank(); ++a) {
            err = std::max(err, circular_distance(peak[a], theta_pred[a]));
            const std::string ax = lam.rank() == 1 ? "" : std::to_string(a + 1);
            out.add(h, tau, tagged("peak_theta" + ax, "t", t), peak[a]);
            out.add(h, tau, tagged("predicted_theta" + ax, "t", t),
                    std::fmod(std::fmod(theta_pred[a], 2 * kPi) + 2 * kPi, 2 * kPi));
        }
        out.add(h, tau, tagged("peak_error", "t", t), err);
        out.add(h, tau, tagged("peak_cells", "t", t), err / cell);
        if (d <= 2) out.densities.push_back({h, t, d, res, position_density(ut, res)});
    });
    return r;
}

// ---------------------------------------------------------------- threshold sweep

SweepReport cmd_threshold_sweep(const ExperimentConfig& c) {
    SweepReport r = start(c, "threshold-sweep");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    const std::vector<double> betas = c.betas.empty() ? std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0} : c.betas;
    const int res = c.resolution;
    const double vol = std::pow(2 * kPi / res, d);
    r.meta["betas"] = betas;
    const size_t nb = betas.size();
    std::vector<double> kappa(c.h_list.size() * nb);
    fan_out(r, c.h_list.size() * nb, [&](size_t idx, SweepReport& out) {
        const double h = c.h_list[idx / nb], beta = betas[idx % nb];
        const double tau = std::pow(h, -beta);
        const auto u0 = c.state.build(h, &model);
        const auto pot = potential(c, h);
        std::vector<double> dens;
        if (pot.kind == PotentialSpec::Kind::None) {
            dens = windowed_density(u0, mode_frequencies(u0.grid(), model, tau / h), c.window, res);
        } else {
            dens.assign(static_cast<size_t>(std::pow(res, d)), 0.0);
            for_each_sample(u0, model, pot, tau, c.window, [&](double, double wt, const FourierState& u) {
                const auto p = position_density(u, res);
                for (size_t i = 0; i < p.size(); ++i) dens[i] += wt * p[i];
            });
        }
        double mx = 0.0, l2 = 0.0;
        for (double v : dens) mx = std::max(mx, v), l2 += v * v * vol;
        kappa[idx] = std::pow(2 * kPi, d) * mx;
        out.add(h, tau, tagged("kappa", "beta", beta), kappa[idx]);
        out.add(h, tau, tagged("l2", "beta", beta), std::sqrt(l2));
    });
    const auto lo = std::min_element(betas.begin(), betas.end()) - betas.begin();
    const auto hi = std::max_element(betas.begin(), betas.end()) - betas.begin();
    for (size_t i = 0; i < c.h_list.size(); ++i)
        r.add(c.h_list[i], std::pow(c.h_list[i], -betas[hi]), "contrast", kappa[i * nb + lo] / kappa[i * nb + hi]);
    return r;
}

// ---------------------------------------------------------------- limit compare

SweepReport cmd_limit_compare(const ExperimentConfig& c) {
    SweepReport r = start(c, "limit-compare");
    if (std::abs(c.tau.exponent + 1.0) > 1e-12 || std::abs(c.tau.coeff - 1.0) > 1e-12)
        throw ConfigError("limit-compare runs at tau = 1/h");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    const Eigen::VectorXd xi0 = c.chart_center.size() ? c.chart_center : or_zero(c.state.xi0, d);
    const auto lam = c.lambda_basis();
    if (lam.rank() == 0) throw ConfigError("limit-compare needs a nonzero Lambda");
    const ChartF chart(model, xi0, lam, c.chart_radius);
    const auto window = MWindow::for_chart(chart);
    const auto panel = two_micro_panel(c, chart);
    const std::vector<double> times = c.times.empty() ? std::vector<double>{0.0, 0.5, 1.0} : c.times;
    r.meta["tolerances"] = {{"dominant_fiber_min", 0.9}, {"step", c.step}, {"bloch_radius", c.bloch_radius},
                            {"R", c.cutoff_r}, {"delta", c.cutoff_delta}};
    r.meta["lambda"] = to_json(lam);

    fan_out(r, c.h_list.size(), [&](size_t i, SweepReport& out) {
        const double h = c.h_list[i], tau = c.tau.at(h);
        const auto u0 = c.state.build(h, &model);
        const auto pot = potential(c, h);
        const auto field = kh_transform(u0, chart, window);
        const double total = field.mass();
        std::vector<BlochDensityOperator> ops;
        std::vector<double> weights;
        std::vector<Eigen::VectorXd> sigmas;
        for (const auto& fib : field.fibers) {
            double m = 0.0;
            for (const auto& a : fib.amplitudes) m += std::norm(a);
            if (m == 0.0) continue;
            ops.push_back(BlochDensityOperator::from_fiber(fib, lam, c.bloch_radius));
            weights.push_back(m);
            sigmas.push_back(fib.sigma);
        }
        const double dominant = *std::max_element(weights.begin(), weights.end()) / total;
        if (dominant < 0.9)
            throw AmbiguousExtraction("dominant fiber carries " + fmt(dominant) + " of the K_h mass at h = " + fmt(h));
        out.add(h, tau, "dominant_fiber_mass", dominant);
        out.add(h, tau, "fibers", static_cast<double>(ops.size()));
        double worst = 0.0;
        for (double t : times) {
            const auto ut = evolve(u0, tau * t, model, pot, c.step * tau);
            for (size_t j = 0; j < panel.size(); ++j) {
                const double full = wigner_pairing(
                    ut, substituted_symbol(panel[j], chart, tau, c.cutoff_r, c.cutoff_delta, TwoMicroPart::Compact));
                double lim = 0.0;
                for (size_t f = 0; f < ops.size(); ++f)
                    lim += weights[f] *
                           heisenberg_compact_pairing(ops[f], t, model, sigmas[f], pot, panel[j], c.cutoff_r);
                const double dev = std::abs(full - lim) / std::max(std::abs(lim), 1e-300);
                const std::string name = c.panel[j].name;
                out.add(h, tau, tagged("full[" + name + "]", "t", t), full);
                out.add(h, tau, tagged("limit[" + name + "]", "t", t), lim);
                out.add(h, tau, tagged("deviation[" + name + "]", "t", t), dev);
                worst = std::max(worst, dev);
            }
        }
        out.add(h, tau, "deviation", worst);
    });
    return r;
}

// ---------------------------------------------------------------- observability

SweepReport cmd_observability(const ExperimentConfig& c) {
    SweepReport r = start(c, "observability");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    const double T = c.horizon;
    if (!(T > 0)) throw ConfigError("observability horizon must be positive");
    Region region = Region::torus(d);
    if (!c.region.empty()) {
        std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> boxes;
        for (const auto& b : c.region) {
            if (b.lo.size() != d || b.hi.size() != d) throw ConfigError("observation box has wrong dimension");
            boxes.emplace_back(b.lo, b.hi);
        }
        region = Region::union_of(boxes);
    }
    const Eigen::VectorXd center = or_zero(c.chi_center, d);
    const double inner = c.chi_inner, outer = c.chi_outer;
    if (!(inner >= 0 && outer > inner)) throw ConfigError("chi radii must satisfy 0 <= inner < outer");
    auto chi = [&](const Eigen::VectorXd& xi) { return smooth_cutoff((xi - center).norm(), inner, outer); };

    // supp chi must avoid the critical set; checked on a seeded sample of the ball.
    {
        std::mt19937_64 rng(c.seed ^ 0x5eedULL);
        std::normal_distribution<double> n;
        std::uniform_real_distribution<double> uni;
        int bad = 0;
        for (int s = 0; s < 256; ++s) {
            Eigen::VectorXd dir(d);
            for (int a = 0; a < d; ++a) dir[a] = n(rng);
            const double rad = s == 0 ? 0.0 : outer * std::pow(uni(rng), 1.0 / d);
            const Eigen::VectorXd xi = center + rad * dir.normalized();
            if (classify_point(model, xi).in_critical_set) ++bad;
        }
        if (bad) throw ConfigError("supp chi meets the critical set of H");
    }
    TimeWindow w;
    w.t_a = 0.0;
    w.t_b = T;
    w.shape = WindowShape::Box;
    r.meta["tolerances"] = {{"horizon", T}, {"draws", c.draws}, {"chi_inner", inner}, {"chi_outer", outer}};
    r.meta["region_fraction"] = region.fraction();

    std::vector<double> chat(c.h_list.size());
    fan_out(r, c.h_list.size(), [&](size_t i, SweepReport& out) {
        const double h = c.h_list[i];
        const double tau = 1.0 / h;
        IVec cen(d);
        for (int a = 0; a < d; ++a) cen[a] = std::llround(center[a] / h);
        const FourierGrid g(d, static_cast<int>(std::ceil(outer / h)) + 1, h, cen);
        std::vector<IVec> modes;
        std::vector<double> cut, freq;
        const auto all = mode_frequencies(g, model, 1.0 / (h * h));
        for (long long k = 0; k < g.size(); ++k) {
            const IVec m = g.mode(k);
            const double v = chi(h * to_eigen(m));
            if (v <= 0.0) continue;
            modes.push_back(m);
            cut.push_back(v);
            freq.push_back(all[k]);
        }
        const size_t n = modes.size();
        const WindowedRegionForm form(modes, freq, w, region);
        Eigen::MatrixXcd cols(static_cast<Eigen::Index>(n), c.draws + static_cast<int>(c.adversarial.size()));
        std::vector<double> num(cols.cols());
        std::mt19937_64 rng(c.seed + 0x9e3779b97f4a7c15ULL * (i + 1));
        std::normal_distribution<double> nd;
        for (int s = 0; s < c.draws; ++s) {
            Eigen::VectorXcd v(n);
            for (size_t k = 0; k < n; ++k) v[k] = cd(nd(rng), nd(rng));
            v.normalize();
            for (size_t k = 0; k < n; ++k) v[k] *= cut[k];
            cols.col(s) = v;
        }
        for (size_t s = 0; s < c.adversarial.size(); ++s) {
            const auto u = c.adversarial[s].build(h, &model);
            Eigen::VectorXcd v(n);
            for (size_t k = 0; k < n; ++k) v[k] = u.grid().contains(modes[k]) ? cut[k] * u.at(modes[k]) : cd(0.0);
            cols.col(c.draws + static_cast<Eigen::Index>(s)) = v;
        }
        const Eigen::VectorXd den = T * form.apply_columns(cols);
        double best = 0.0, rand = 0.0;
        for (Eigen::Index s = 0; s < cols.cols(); ++s) {
            const double nv = cols.col(s).squaredNorm();
            if (!(nv > 0)) continue;
            const double ratio = nv / den[s];
            if (s < c.draws)
                rand = std::max(rand, ratio);
            else
                out.add(h, tau, tagged("C_adversarial", "i", static_cast<double>(s - c.draws)), ratio);
            best = std::max(best, ratio);
        }
        chat[i] = best;
        out.add(h, tau, "C_random", rand);
        out.add(h, tau, "C_hat", best);
        out.add(h, tau, "modes", static_cast<double>(n));
    });
    const double mx = *std::max_element(chat.begin(), chat.end()), mn = *std::min_element(chat.begin(), chat.end());
    r.add(c.h_list.back(), 1.0 / c.h_list.back(), "max_over_min", mx / mn);
    return r;
}

// ---------------------------------------------------------------- spacing

SpacingResult minimal_spacing(const HamiltonianModel& model, double h, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi, double rel_tol) {
    const int d = model.dim();
    if (lo.size() != d || hi.size() != d) throw ConfigError("energy window has wrong dimension");
    IVec kl(d), kh(d);
    for (int a = 0; a < d; ++a) {
        kl[a] = static_cast<long long>(std::floor(lo[a] / h)) + 1;
        kh[a] = static_cast<long long>(std::ceil(hi[a] / h)) - 1;
        if (kh[a] < kl[a]) throw EmptyCluster("no lattice point in the energy window");
    }
    std::vector<double> e;
    IVec k = kl;
    while (true) {
        e.push_back(model.value(h * to_eigen(k)));
        int a = 0;
        while (a < d && k[a] == kh[a]) k[a] = kl[a], ++a;
        if (a == d) break;
        ++k[a];
    }
    std::sort(e.begin(), e.end());
    std::vector<double> distinct{e.front()};
    for (double v : e)
        if (v - distinct.back() > rel_tol * std::max(1.0, std::abs(v))) distinct.push_back(v);
    if (distinct.size() < 2) throw EmptyCluster("fewer than two distinct energies in the window");
    double gap = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < distinct.size(); ++i) gap = std::min(gap, distinct[i] - distinct[i - 1]);
    return {h / gap, gap, static_cast<long long>(distinct.size())};
}

SweepReport cmd_spacing(const ExperimentConfig& c) {
    SweepReport r = start(c, "spacing");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    if (c.xi_lo.size() != d || c.xi_hi.size() != d) throw ConfigError("spacing needs xi_lo and xi_hi");
    const bool cluster = c.state.family == StateRecipe::Family::Cluster;
    std::vector<TorusSymbol> panel;
    if (cluster) panel = torus_panel(c, d);
    r.meta["tolerances"] = {{"tau_factor", c.tau_factor}, {"energy_rel_tol", 1e-12}};
    fan_out(r, c.h_list.size(), [&](size_t i, SweepReport& out) {
        const double h = c.h_list[i];
        const auto s = minimal_spacing(model, h, c.xi_lo, c.xi_hi);
        out.add(h, s.tau_h, "tau_H", s.tau_h);
        out.add(h, s.tau_h, "min_gap", s.min_gap);
        out.add(h, s.tau_h, "distinct_energies", static_cast<double>(s.distinct));
        if (!cluster) return;
        const double tau = c.tau_factor * s.tau_h;
        const auto u = c.state.build(h, &model);
        double dev = 0.0;
        for (const auto& a : panel)
            dev = std::max(dev, std::abs(time_averaged_pairing(u, a, model, PotentialSpec::none(), tau, c.window) -
                                         wigner_pairing(u, a)));
        out.add(h, tau, "cluster_deviation", dev);
    });
    return r;
}

// ---------------------------------------------------------------- counterexamples

namespace {

// States carried by a single mode along axis 0 under a separable quadratic
// Hamiltonian and an x1-independent potential reduce to the last axis.
struct Reduced {
    FourierState u;
    HamiltonianModel model;
    PotentialSpec pot;
    IVec normal;
};

std::optional<Reduced> reduce_to_last_axis(const FourierState& u, const HamiltonianModel& model,
                                           const ExperimentConfig& c, double h, const IVec& normal) {
    const auto& g = u.grid();
    if (g.dim != 2 || model.family() != Family::Quadratic || model.a_matrix()(0, 1) != 0.0 || !model.theta().isZero()) return {};
    if (normal[0] != 0) return {};
    std::optional<long long> k1;
    for (long long i = 0; i < g.size(); ++i) {
        if (u.coeffs()[i] == cd(0.0)) continue;
        const long long v = g.mode(i)[0];
        if (k1 && *k1 != v) return {};
        k1 = v;
    }
    if (!k1) return {};
    NamedSymbol v{"potential", {}};
    for (auto t : c.potential) {
        if (t.k[0] != 0) return {};
        t.k = {t.k[1]};
        t.coeff *= c.potential_scale.at(h);
        v.terms.push_back(t);
    }
    FourierGrid g1(1, g.radius, h, {g.center[1]});
    FourierState u1(g1);
    for (long long k = -g.radius; k <= g.radius; ++k) {
        const IVec m{*k1, g.center[1] + k};
        if (g.contains(m)) u1.set({m[1]}, u.at(m));
    }
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = model.a_matrix()(1, 1);
    PotentialSpec pot = v.terms.empty() ? PotentialSpec::none() : PotentialSpec::from_symbol(v.torus(1));
    return Reduced{u1, HamiltonianModel::quadratic(a), pot, {normal[1]}};
}

}  // namespace

SweepReport cmd_counterexamples(const ExperimentConfig& c) {
    SweepReport r = start(c, "counterexamples");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    std::string kind = c.case_name;
    if (kind.empty()) {
        switch (c.state.family) {
            case StateRecipe::Family::PowerQuasimode: kind = "power_quasimode"; break;
            case StateRecipe::Family::Wunsch: kind = "wunsch"; break;
            case StateRecipe::Family::LagrangianDiag: kind = "saddle_diag"; break;
            default: throw ConfigError("counterexamples need a case name");
        }
    }
    IVec normal = c.normal;
    if (normal.empty()) {
        if (kind == "wunsch")
            normal = {0, 1};
        else if (kind == "saddle_diag")
            normal = {1, -1};
        else if (d == 1)
            normal = {1};
        else
            throw ConfigError("counterexample needs a slab normal");
    }
    if (static_cast<int>(normal.size()) != d) throw ConfigError("slab normal has wrong dimension");
    double offset = c.offset;
    if (kind == "power_quasimode" && c.state.x0.size() == d) offset = to_eigen(normal).dot(c.state.x0);
    const Region region = Region::slab(normal, offset, c.neighborhood);
    r.meta["case"] = kind;
    r.meta["tolerances"] = {{"threshold", c.threshold}, {"radius", c.neighborhood}};

    fan_out(r, c.h_list.size(), [&](size_t i, SweepReport& out) {
        const double h = c.h_list[i], tau = c.tau.at(h);
        const auto u0 = c.state.build(h, &model);
        const auto pot = potential(c, h);
        double mass = 0.0;
        if (pot.kind == PotentialSpec::Kind::None) {
            mass = windowed_region_mass(u0, mode_frequencies(u0.grid(), model, tau / h), c.window, region);
        } else {
            auto red = reduce_to_last_axis(u0, model, c, h, normal);
            const FourierState& u = red ? red->u : u0;
            const HamiltonianModel& m = red ? red->model : model;
            const PotentialSpec& v = red ? red->pot : pot;
            const IVec& b = red ? red->normal : normal;
            for_each_sample(u, m, v, tau, c.window,
                            [&](double, double wt, const FourierState& s) { mass += wt * slab_mass(s, b, offset, c.neighborhood); });
            out.add(h, tau, "reduced", red ? 1.0 : 0.0);
        }
        out.add(h, tau, "mass", mass);
        out.add(h, tau, "state_modes", static_cast<double>(u0.grid().size()));
    });
    return r;
}

// ---------------------------------------------------------------- K_h diagnostics

namespace {

// sum over fibers of int_{T^d} |K_h u(sigma, y)|^2 dy by the trapezoid rule,
// exact once the node count exceeds the label spread.
double kh_quadrature_mass(const KhField& f) {
    const int d = f.grid.dim;
    double total = 0.0;
    for (size_t fi = 0; fi < f.fibers.size(); ++fi) {
        const auto& fib = f.fibers[fi];
        long long spread = 0;
        for (int a = 0; a < d; ++a) {
            long long lo = 0, hi = 0;
            for (size_t j = 0; j < fib.modes.size(); ++j) {
                lo = j ? std::min(lo, fib.modes[j][a]) : fib.modes[j][a];
                hi = j ? std::max(hi, fib.modes[j][a]) : fib.modes[j][a];
            }
            spread = std::max(spread, hi - lo);
        }
        const int n = static_cast<int>(spread) + 2;
        long long nodes = 1;
        for (int a = 0; a < d; ++a) nodes *= n;
        double s = 0.0;
        Eigen::VectorXd y(d);
        for (long long p = 0; p < nodes; ++p) {
            long long rest = p;
            for (int a = 0; a < d; ++a) {
                y[a] = 2 * kPi * static_cast<double>(rest % n) / n;
                rest /= n;
            }
            s += std::norm(f.evaluate(fi, y));
        }
        total += s * std::pow(2 * kPi / n, d);
    }
    return total;
}

}  // namespace

SweepReport cmd_kh_diagnostics(const ExperimentConfig& c) {
    SweepReport r = start(c, "kh-diagnostics");
    const auto model = c.hamiltonian.build();
    const int d = model.dim();
    const Eigen::VectorXd xi0 = c.chart_center.size() ? c.chart_center : or_zero(c.state.xi0, d);
    const auto lam = c.lambda_basis();
    const ChartF chart(model, xi0, lam, c.chart_radius);
    const auto window = MWindow::for_chart(chart);
    std::vector<TwoMicroSymbol> panel;
    if (c.defect != "none") panel = two_micro_panel(c, chart);
    const std::vector<double> times = c.times.empty() ? std::vector<double>{0.5, 1.0} : c.times;
    r.meta["defect"] = c.defect;
    r.meta["lambda"] = to_json(lam);
    r.meta["tolerances"] = {{"R", c.cutoff_r}, {"delta", c.cutoff_delta}, {"s", c.flow_s}};

    fan_out(r, c.h_list.size(), [&](size_t i, SweepReport& out) {
        const double h = c.h_list[i], tau = c.tau.at(h);
        const auto u0 = c.state.build(h, &model);
        const auto field = kh_transform(u0, chart, window);
        // Direct windowed mass and the partition of the grid into cosets.
        const auto& g = u0.grid();
        double direct = 0.0;
        std::map<IVec, int> seen;
        for (const auto& fib : field.fibers)
            for (const auto& k : fib.modes) ++seen[k];
        double violations = 0.0, rebuild = 0.0;
        const auto back = field.rebuild();
        for (long long k = 0; k < g.size(); ++k) {
            const cd v = u0.coeffs()[k];
            const IVec m = g.mode(k);
            const Eigen::VectorXd xi = h * to_eigen(m);
            cd expect = 0.0;
            if (v != cd(0.0) && chart.in_domain(xi)) expect = window(chart.decompose(xi).sigma) * v;
            direct += std::norm(expect);
            rebuild = std::max(rebuild, std::abs(back.coeffs()[k] - expect));
            auto it = seen.find(m);
            const int count = it == seen.end() ? 0 : it->second;
            if (count > 1 || (expect != cd(0.0) && count != 1)) violations += 1;
        }
        for (const auto& fib : field.fibers)
            for (const auto& k : fib.modes)
                if (lam.reduce(k) != fib.coset_rep) violations += 1;
        const double quad = kh_quadrature_mass(field);
        out.add(h, tau, "plancherel_error", direct > 0 ? std::abs(quad - direct) / direct : std::abs(quad));
        out.add(h, tau, "rebuild_error", rebuild);
        out.add(h, tau, "partition_violations", violations);
        out.add(h, tau, "fibers", static_cast<double>(field.fibers.size()));

        if (c.defect == "sphere") {
            double worst = 0.0;
            const auto pot = potential(c, h);
            for (size_t j = 0; j < panel.size(); ++j) {
                const auto moved = pullback_phi1(panel[j], chart, c.flow_s);
                const auto sa = substituted_symbol(panel[j], chart, tau, c.cutoff_r, c.cutoff_delta, TwoMicroPart::Sphere);
                const auto sb = substituted_symbol(moved, chart, tau, c.cutoff_r, c.cutoff_delta, TwoMicroPart::Sphere);
                const double va = time_averaged_pairing(u0, sa, model, pot, tau, c.window);
                const double vb = time_averaged_pairing(u0, sb, model, pot, tau, c.window);
                out.add(h, tau, "sphere[" + c.panel[j].name + "]", va);
                worst = std::max(worst, std::abs(vb - va));
            }
            out.add(h, tau, "sphere_defect", worst);
        } else if (c.defect == "transport") {
            double worst = 0.0;
            for (double t : times) {
                const auto ut = evolve(u0, tau * t, model, potential(c, h), c.window.dt);
                for (size_t j = 0; j < panel.size(); ++j) {
                    const auto moved = pullback_phi1_tilde(panel[j], chart, t);
                    const double lhs = wigner_pairing(
                        ut, substituted_symbol(panel[j], chart, tau, c.cutoff_r, c.cutoff_delta, TwoMicroPart::Compact));
                    const double rhs = wigner_pairing(
                        u0, substituted_symbol(moved, chart, tau, c.cutoff_r, c.cutoff_delta, TwoMicroPart::Compact));
                    out.add(h, tau, tagged("compact[" + c.panel[j].name + "]", "t", t), lhs);
                    worst = std::max(worst, std::abs(lhs - rhs));
                }
            }
            out.add(h, tau, "transport_defect", worst);
        }
    });
    return r;
}

// ---------------------------------------------------------------- dispatch

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"orbit-convergence", "dirac-drift",     "threshold-sweep",
                                                "limit-compare",     "observability",   "spacing",
                                                "counterexamples",   "kh-diagnostics"};
    return names;
}

SweepReport run_command(const ExperimentConfig& c, const std::string& command) {
    const std::string cmd = command.empty() ? c.command : command;
    if (cmd == "orbit-convergence") return cmd_orbit_convergence(c);
    if (cmd == "dirac-drift") return cmd_dirac_drift(c);
    if (cmd == "threshold-sweep") return cmd_threshold_sweep(c);
    if (cmd == "limit-compare") return cmd_limit_compare(c);
    if (cmd == "observability") return cmd_observability(c);
    if (cmd == "spacing") return cmd_spacing(c);
    if (cmd == "counterexamples") return cmd_counterexamples(c);
    if (cmd == "kh-diagnostics") return cmd_kh_diagnostics(c);
    throw ConfigError("unknown command '" + cmd + "'");
}

}  // namespace semiclass
