// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance            all criteria
//   acceptance 1 4 7      a subset

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "semiclass/config.hpp"
#include "semiclass/errors.hpp"
#include "semiclass/experiments.hpp"
#include "semiclass/parallel.hpp"
#include "semiclass/twomicro.hpp"

using namespace semiclass;
using oracle::as_vector;
using oracle::kPi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

ExperimentConfig load(const std::string& name) {
    return load_config(std::string(SEMICLASS_CONFIG_DIR) + "/" + name + ".toml");
}

SweepReport run(const std::string& name) { return run_command(load(name)); }

IntVector iv(std::initializer_list<long long> v) { return to_int_vector(IVec(v)); }

// ------------------------------------------------------------------ 1

void weyl_oracle(Outcome& o) {
    std::mt19937_64 rng(1);
    double worst = 0.0;
    for (int d : {1, 2})
        for (int n = 1; n <= (d == 1 ? 8 : 4); ++n)
            for (double h : {0.3, 1.0 / 8}) {
                FourierGrid g(d, n, h);
                auto a = oracle::random_symbol(d, 2, rng);
                auto u = oracle::random_state(g, rng);
                FourierGrid out(d, n + a.max_mode(), h);
                Eigen::VectorXcd expect = oracle::dense_weyl(a, g, out) * as_vector(u);
                auto got = weyl_apply(a, u);
                if (!(got.grid() == out)) {
                    o.require(false, "weyl_apply output grid");
                    continue;
                }
                worst = std::max(worst, (as_vector(got) - expect).cwiseAbs().maxCoeff());
                cd pair = as_vector(u).dot(oracle::dense_weyl(a, g, g) * as_vector(u));
                worst = std::max(worst, std::abs(wigner_pairing_complex(u, a) - pair));
            }
    o.detail << "max abs error " << g17(worst);
    o.require(worst < 1e-12, "error < 1e-12");
}

// ------------------------------------------------------------------ 2

void unitarity(Outcome& o) {
    std::mt19937_64 rng(2);
    double free_err = 0.0;
    for (const auto& model : {HamiltonianModel::quadratic(Eigen::MatrixXd::Identity(2, 2)),
                              HamiltonianModel::power(4.0, 2), HamiltonianModel::saddle2d()}) {
        auto u = oracle::random_state(FourierGrid(2, 12, 1.0 / 16, {16, 0}), rng);
        for (double t : {0.1, 1.0, 37.5, 1e4}) free_err = std::max(free_err, std::abs(free_propagate(u, t, model).norm() - 1.0));
    }

    // cos-potential benchmark: 1D packet at xi0 = 1, h = 1/32, V = cos x
    const double h = 1.0 / 32;
    CoherentParams p;
    p.x0 = Eigen::VectorXd::Constant(1, 1.0);
    p.xi0 = Eigen::VectorXd::Constant(1, 1.0);
    p.eps = std::sqrt(h);
    const auto u0 = coherent_state(p, h);
    const FourierGrid big(1, u0.grid().radius + 64, h, u0.grid().center);
    const auto u = u0.regrid(big);
    const auto model = HamiltonianModel::quadratic(2.0 * Eigen::MatrixXd::Identity(1, 1));
    const auto cosv = PotentialSpec::from_function([](double, const Eigen::VectorXd& x) { return std::cos(x[0]); }, 1.0);
    double drift = 0.0;
    auto v = u;
    for (int s = 1; s <= 10; ++s) {
        v = perturbed_propagate(v, 0.1, model, cosv, 1e-3);
        drift = std::max(drift, std::abs(v.norm() - 1.0));
    }
    const auto r1 = perturbed_propagate(u, 1.0, model, cosv, 1e-2);
    const auto r2 = perturbed_propagate(u, 1.0, model, cosv, 5e-3);
    const auto r3 = perturbed_propagate(u, 1.0, model, cosv, 2.5e-3);
    const double order =
        std::log2((as_vector(r1) - as_vector(r2)).norm() / (as_vector(r2) - as_vector(r3)).norm());
    o.detail << "free norm error " << g17(free_err) << ", split-step drift " << g17(drift) << ", Richardson order "
             << g17(order);
    o.require(free_err < 1e-12, "free norm < 1e-12");
    o.require(drift < 1e-8, "drift < 1e-8");
    o.require(order >= 1.9, "order >= 1.9");
}

// ------------------------------------------------------------------ 3

void lattice_suite(Outcome& o) {
    std::mt19937_64 rng(3);
    long long checks = 0, bad = 0;
    auto check = [&](bool ok) {
        ++checks;
        if (!ok) ++bad;
    };

    // saturation: idempotent, and the integer points of the rational span
    std::uniform_int_distribution<int> e(-20, 20);
    for (int trial = 0; trial < 60; ++trial) {
        const int d = 1 + trial % 4;
        const int r = 1 + static_cast<int>(rng() % d);
        std::vector<IntVector> cols;
        for (int i = 0; i < r; ++i) {
            IntVector c;
            for (int j = 0; j < d; ++j) c.emplace_back(e(rng));
            cols.push_back(c);
        }
        std::vector<std::vector<mpq_class>> rows;
        for (const auto& c : cols) rows.push_back(oracle::as_row(c));
        if (oracle::rational_rank(rows) < r) continue;
        const auto s = saturate(cols, d);
        check(s.rank() == r);
        check(saturate(s.hnf(), d) == s);
        if (d <= 3)
            oracle::for_box(d, 4, [&](const IVec& k) {
                check(s.contains(k) == oracle::in_rational_span(cols, to_int_vector(k)));
            });
    }

    // annihilators against brute force on |k|_inf <= 8
    std::uniform_int_distribution<int> num(-6, 6), den(1, 5);
    auto random_rational = [&](int d) {
        RationalVector v;
        for (int i = 0; i < d; ++i) {
            mpq_class q(num(rng), den(rng));
            q.canonicalize();
            v.push_back(q);
        }
        return v;
    };
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 2 + trial % 2;
        auto v = random_rational(d);
        if (trial % 5 == 0) v[d - 1] = 0;
        const auto lam = annihilator_lattice(v);
        oracle::for_box(d, 8, [&](const IVec& k) { check(lam.contains(k) == (oracle::dot(v, k) == 0)); });
    }

    // partition: each gradient lands in exactly one class, Lambda_xi itself
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 4;
        auto v = random_rational(d);
        if (trial % 7 == 0) v.assign(d, mpq_class(0));
        const auto res = resonance_classify(v);
        check(res.lattice.rank() + res.order == d);
        oracle::for_box(d, d <= 3 ? 5 : 3, [&](const IVec& k) { check(res.lattice.contains(k) == (oracle::dot(v, k) == 0)); });
    }

    // fractional reduce: the shift lies in Lambda and the result in the unit cell
    std::uniform_real_distribution<double> uni(-20, 20);
    for (const auto& lam : {SubmoduleBasis::from_primitive(2, {iv({3, -2})}),
                            SubmoduleBasis::from_primitive(3, {iv({1, 0, 2}), iv({0, 1, -1})}),
                            SubmoduleBasis::from_primitive(4, {iv({1, 1, 0, 0}), iv({0, 2, 1, 3})})}) {
        const Eigen::MatrixXd b = lam.basis_matrix();
        for (int i = 0; i < 200; ++i) {
            Eigen::VectorXd coeff(lam.rank());
            for (int j = 0; j < lam.rank(); ++j) coeff[j] = uni(rng);
            const Eigen::VectorXd eta = b * coeff;
            const Eigen::VectorXd c = fractional_coordinates(eta, lam);
            for (int j = 0; j < lam.rank(); ++j) check(c[j] >= 0.0 && c[j] < 1.0);
            const Eigen::VectorXd shift = fractional_reduce(eta, lam) - eta;
            const Eigen::VectorXd sc = (b.transpose() * b).ldlt().solve(b.transpose() * shift);
            for (int j = 0; j < lam.rank(); ++j) check(std::abs(sc[j] - std::round(sc[j])) < 1e-9);
        }
    }
    o.detail << checks << " checks, " << bad << " violations";
    o.require(bad == 0, "all exact");
}

// ------------------------------------------------------------------ 4

void plancherel(Outcome& o) {
    std::mt19937_64 rng(4);
    struct Case {
        HamiltonianModel model;
        Eigen::Vector2d xi0;
        SubmoduleBasis lam;
    };
    const std::vector<Case> cases{
        {HamiltonianModel::quadratic(Eigen::MatrixXd::Identity(2, 2)), Eigen::Vector2d(1, 0),
         SubmoduleBasis::from_primitive(2, {iv({0, 1})})},
        {HamiltonianModel::quadratic({{mpq_class(2), mpq_class(1)}, {mpq_class(1), mpq_class(2)}},
                                     {mpq_class(0), mpq_class(0)}),
         Eigen::Vector2d(0.7, 0.7), SubmoduleBasis::from_primitive(2, {iv({1, -1})})}};
    double worst = 0.0;
    int states = 0;
    std::normal_distribution<double> n;
    for (const auto& cs : cases)
        for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
            ChartF chart(cs.model, cs.xi0, cs.lam, 1.0);
            const MWindow m = MWindow::for_chart(chart);
            const IVec center{std::llround(cs.xi0[0] / h), std::llround(cs.xi0[1] / h)};
            const FourierGrid g(2, static_cast<int>(std::ceil(0.5 / h)) + 1, h, center);
            for (int trial = 0; trial < 20; ++trial, ++states) {
                FourierState u(g);
                for (long long i = 0; i < g.size(); ++i)
                    if (chart.in_domain(h * to_eigen(g.mode(i)))) u.coeffs()[i] = cd(n(rng), n(rng));
                u.normalize();
                const auto f = kh_transform(u, chart, m);
                // sum_k |m(sigma(hk)) u^(k)|^2 straight from the coefficients
                double lhs = 0.0;
                for (long long i = 0; i < g.size(); ++i) {
                    const Eigen::VectorXd xi = h * to_eigen(g.mode(i));
                    if (chart.in_domain(xi)) lhs += std::norm(u.coeffs()[i] * m(chart.decompose(xi).sigma));
                }
                // sum over fibers of int_{T^2} |K_h u|^2 by an exact trapezoid rule
                const int q = 2 * g.radius + 4;
                double rhs = 0.0;
                for (size_t fi = 0; fi < f.fibers.size(); ++fi)
                    for (int a = 0; a < q; ++a)
                        for (int b = 0; b < q; ++b)
                            rhs += std::norm(f.evaluate(fi, Eigen::Vector2d(2 * kPi * a / q, 2 * kPi * b / q)));
                rhs *= std::pow(2 * kPi / q, 2);
                worst = std::max(worst, std::abs(lhs - rhs) / lhs);
            }
        }
    o.detail << states << " states, max relative error " << g17(worst);
    o.require(worst < 1e-10, "relative error < 1e-10");
}

// ------------------------------------------------------------------ 5

void orbit_convergence(Outcome& o) {
    const auto c = load("ac5_orbit_convergence");
    const auto r = run_command(c);
    o.require(c.panel.size() == 6, "panel of 6 symbols");
    o.detail << "e(h) =";
    bool decreasing = true;
    for (size_t i = 0; i < c.h_list.size(); ++i) {
        const double e = r.get("e", c.h_list[i]);
        o.detail << " " << g17(e);
        if (i && !(e < r.get("e", c.h_list[i - 1]))) decreasing = false;
    }
    const double last = r.get("e", std::pow(2.0, -9));
    o.require(decreasing, "strictly decreasing");
    o.require(last < 0.05, "e(2^-9) < 0.05");
}

// ------------------------------------------------------------------ 6

void dirac_drift(Outcome& o) {
    const double h = std::pow(2.0, -7);
    for (const char* name : {"ac6_dirac_drift", "ac6_dirac_drift_static"}) {
        const auto c = load(name);
        const auto r = run_command(c);
        // Lambda0 = Z(0,1) at xi0 = (1,0); d2H = I, so theta(t) = x0_2 + t eta0_2
        const double cell = 2 * kPi / c.resolution;
        double worst = 0.0;
        for (double t : c.times) {
            const double pred = c.state.x0[1] + t * c.state.eta0[1];
            const double peak = r.get(tagged("peak_theta", "t", t), h);
            double dist = std::fmod(std::abs(peak - pred), 2 * kPi);
            dist = std::min(dist, 2 * kPi - dist);
            worst = std::max(worst, dist / cell);
        }
        o.detail << name << ": max " << g17(worst) << " cells; ";
        o.require(worst <= 1.0, std::string(name) + " within one cell");
    }
}

// ------------------------------------------------------------------ 7

void threshold(Outcome& o) {
    const auto r = run("ac7_threshold_sweep");
    const double h5 = std::pow(2.0, -5), h8 = std::pow(2.0, -8);
    const double half = r.get(tagged("kappa", "beta", 0.5), h8);
    const double one5 = r.get(tagged("kappa", "beta", 1.0), h5), one8 = r.get(tagged("kappa", "beta", 1.0), h8);
    o.detail << "kappa(2^-8, 1/2) = " << g17(half) << ", kappa(2^-5, 1) = " << g17(one5) << ", kappa(2^-8, 1) = "
             << g17(one8);
    o.require(half > 10, "kappa(2^-8, 1/2) > 10");
    o.require(one8 <= 2 * one5, "kappa(2^-8, 1) <= 2 kappa(2^-5, 1)");
}

// ------------------------------------------------------------------ 8

void limit_compare(Outcome& o) {
    for (const char* name : {"ac8_limit_compare", "ac8_limit_compare_potential"}) {
        const auto c = load(name);
        const auto r = run_command(c);
        o.detail << name << ":";
        bool decreasing = true;
        for (size_t i = 0; i < c.h_list.size(); ++i) {
            const double dev = r.get("deviation", c.h_list[i]);
            o.detail << " " << g17(dev);
            if (i && !(dev < r.get("deviation", c.h_list[i - 1]))) decreasing = false;
        }
        o.detail << "; ";
        o.require(r.get("deviation", std::pow(2.0, -8)) <= 0.1, std::string(name) + " deviation <= 10%");
        o.require(decreasing, std::string(name) + " decreasing");
    }
}

// ------------------------------------------------------------------ 9

void observability(Outcome& o) {
    const auto c = load("ac9_observability");
    const auto r = run_command(c);
    // independent of the report's own ratio row
    double mx = 0.0, mn = 1e300;
    for (double h : c.h_list) {
        const double v = r.get("C_hat", h);
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    const auto t = load("ac9_observability_torus");
    const auto rt = run_command(t);
    double torus = 0.0;
    for (double h : t.h_list) torus = std::max(torus, std::abs(rt.get("C_hat", h) - 1.0 / t.horizon));
    o.detail << "strip max/min " << g17(mx / mn) << ", torus |C - 1/T| " << g17(torus);
    o.require(mx / mn <= 2, "max/min <= 2");
    o.require(torus < 1e-10, "torus C = 1/T");
}

// ------------------------------------------------------------------ 10

void counterexamples(Outcome& o) {
    for (const char* name : {"ac10_power_quasimode", "ac10_wunsch", "ac10_saddle_diag"}) {
        const auto c = load(name);
        const auto r = run_command(c);
        const double mass = r.get("mass", c.h_list.back());
        o.detail << name << " " << g17(mass);
        o.require(mass > 0.9, std::string(name) + " mass > 0.9");
        o.detail << "; ";
    }
}

// ------------------------------------------------------------------ 11

void invariance(Outcome& o) {
    const double h5 = std::pow(2.0, -5), h8 = std::pow(2.0, -8);
    const auto s = run("ac11_sphere_invariance");
    const double s5 = s.get("sphere_defect", h5), s8 = s.get("sphere_defect", h8);
    const auto t = run("ac11_transport");
    const double t5 = t.get("transport_defect", h5), t8 = t.get("transport_defect", h8);
    o.detail << "phi1 defect " << g17(s5) << " -> " << g17(s8) << ", transport defect " << g17(t5) << " -> " << g17(t8);
    o.require(s5 >= 2 * s8, "phi1 factor >= 2");
    o.require(t5 >= 2 * t8, "transport factor >= 2");
}

struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{{"Weyl oracle equivalence", weyl_oracle},
                                     {"unitarity and split-step order", unitarity},
                                     {"lattice suite", lattice_suite},
                                     {"K_h Plancherel", plancherel},
                                     {"orbit-measure convergence", orbit_convergence},
                                     {"drift law", dirac_drift},
                                     {"threshold contrast", threshold},
                                     {"limit-model consistency", limit_compare},
                                     {"observability sweep", observability},
                                     {"counterexample suite", counterexamples},
                                     {"two-micro invariance trends", invariance}};
    std::vector<int> pick;
    for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
    if (pick.empty())
        for (int i = 1; i <= static_cast<int>(all.size()); ++i) pick.push_back(i);

    set_thread_count(0);
    int failed = 0;
    for (int id : pick) {
        if (id < 1 || id > static_cast<int>(all.size())) {
            std::fprintf(stderr, "no criterion %d\n", id);
            return 2;
        }
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            all[id - 1].run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("AC%-2d %s  %s: %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", all[id - 1].name,
                    o.detail.str().c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(pick.size()) - failed, pick.size());
    return failed ? 1 : 0;
}
