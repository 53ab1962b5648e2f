#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semiclass/errors.hpp"
#include "semiclass/limit.hpp"
#include "semiclass/states.hpp"

using namespace semiclass;

namespace {

constexpr double kPi = std::numbers::pi;

SubmoduleBasis line(std::initializer_list<long long> g) {
    return SubmoduleBasis::from_primitive(static_cast<int>(g.size()), {to_int_vector(IVec(g))});
}

HamiltonianModel half_laplacian() { return HamiltonianModel::quadratic(Eigen::MatrixXd::Identity(2, 2)); }

std::vector<IVec> mode_set(const TorusSymbol& a) {
    std::vector<IVec> r;
    for (const auto& m : a.modes()) r.push_back(m.k);
    std::sort(r.begin(), r.end());
    return r;
}

}  // namespace

TEST_CASE("averaged symbols") {
    TorusSymbol a(2);
    a.add_cos({1, 0}).add_cos({0, 1});
    auto avg = averaged_symbol(a, line({0, 1}));
    Eigen::Vector2d xi(0.2, 0.1);
    for (double x1 : {0.0, 1.0, 2.5})
        for (double x2 : {0.0, 0.7}) {
            Eigen::Vector2d x(x1, x2);
            CHECK(std::abs(avg.evaluate(x, xi) - std::cos(x2)) < 1e-14);
        }
    TorusSymbol b(2);
    for (long long i = -3; i <= 3; ++i)
        for (long long j = -3; j <= 3; ++j) b.add_term({i, j}, cd(1.0 + i, j));
    CHECK(mode_set(averaged_symbol(b, SubmoduleBasis::zero(2))) == std::vector<IVec>{{0, 0}});
    auto diag = averaged_symbol(b, line({1, -1}));
    std::vector<IVec> want;
    for (long long j = -3; j <= 3; ++j) want.push_back({j, -j});
    std::sort(want.begin(), want.end());
    CHECK(mode_set(diag) == want);
    CHECK(mode_set(averaged_symbol(diag, line({1, -1}))) == want);
    CHECK(mode_set(averaged_symbol(diag, SubmoduleBasis::full(2))) == want);
}

TEST_CASE("averaging is exact on single-coset states") {
    const double h = 1.0 / 16;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n;
    FourierGrid g(2, 6, h, {16, 0});
    FourierState u(g);
    for (long long j = -6; j <= 6; ++j) u.set({19, j}, cd(n(rng), n(rng)));
    u.normalize();
    auto gx = [](const Eigen::VectorXd& xi) -> cd { return std::exp(-xi.squaredNorm()); };
    TorusSymbol a(2);
    a.add_cos({1, 0}, gx).add_cos({0, 2}, gx).add_term({1, 1}, 0.5, gx).add_term({0, -1}, cd(0, 1), gx);
    CHECK(wigner_pairing(u, a) == doctest::Approx(wigner_pairing(u, averaged_symbol(a, line({0, 1})))).epsilon(1e-14));
}

TEST_CASE("orbit measure pairing") {
    auto model = half_laplacian();
    auto g = [](const Eigen::VectorXd& xi) -> cd { return std::exp(-(xi - Eigen::Vector2d(1, 0)).squaredNorm()); };
    TorusSymbol a(2);
    a.add_cos({0, 1}, g);
    auto spec = OrbitMeasureSpec::make(model, Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0));
    CHECK(spec.lambda0 == line({0, 1}));
    CHECK(orbit_measure_pairing(spec, a) == doctest::Approx(1.0));
    auto off = OrbitMeasureSpec::make(model, Eigen::Vector2d(0, kPi / 2), Eigen::Vector2d(1, 0));
    CHECK(std::abs(orbit_measure_pairing(off, a)) < 1e-15);

    // Nonresonant: only the x-mean survives.
    TorusSymbol b(2);
    b.add_term({0, 0}, 0.4, g).add_cos({1, 0}, g).add_cos({2, -3}, g);
    auto nr = OrbitMeasureSpec::make(model, Eigen::Vector2d(0.3, 0.2), Eigen::Vector2d(1, std::sqrt(2.0)),
                                     DetectMode{});
    CHECK(nr.lambda0.rank() == 0);
    CHECK(orbit_measure_pairing(nr, b) == doctest::Approx(0.4 * g(Eigen::Vector2d(1, std::sqrt(2.0))).real()));

    // Invariance along the orbit directions (Lambda0-perp).
    TorusSymbol c(2);
    c.add_cos({0, 1}, g).add_sin({0, 3}, g).add_cos({1, 1}, g);
    for (double v : {0.3, -2.0, 7.5}) {
        OrbitMeasureSpec moved = off;
        moved.x0 = off.x0 + Eigen::Vector2d(v, 0);
        CHECK(std::abs(orbit_measure_pairing(moved, c) - orbit_measure_pairing(off, c)) < 1e-14);
    }
}

TEST_CASE("free Bloch propagation") {
    auto model = HamiltonianModel::quadratic((Eigen::Matrix2d() << 2, 1, 1, 3).finished());
    Eigen::Vector2d sigma(3, -1);  // dH(sigma) = (5, 0), orthogonal to (0, 1)
    BlochSpace space(line({0, 1}), Eigen::Vector2d(0, 0.25), 4);
    CHECK(space.dim() == 9);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space.dim());
    const long long i = space.index({0, 2});
    v[i] = 1.0;
    auto w = bloch_propagate(v, 1.7, space, model, sigma);
    // 1/2 d2H (l - w).(l - w) with l - w = (0, 1.75), d2H_22 = 3.
    CHECK(std::abs(w[i] - std::polar(1.0, -1.7 * 0.5 * 3 * 1.75 * 1.75)) < 1e-14);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (auto& c : v) c = cd(n(rng), n(rng));
    auto a = bloch_propagate(bloch_propagate(v, 0.4, space, model, sigma), 0.9, space, model, sigma);
    auto b = bloch_propagate(v, 1.3, space, model, sigma);
    CHECK((a - b).norm() < 1e-13);
    CHECK(std::abs(b.norm() - v.norm()) < 1e-12);
    CHECK_THROWS_AS(bloch_propagate(v, 1.0, space, model, Eigen::Vector2d(3, 0)), PreconditionFailed);
}

TEST_CASE("Bloch propagation with a lattice potential against a Taylor expansion") {
    auto model = half_laplacian();
    Eigen::Vector2d sigma(1, 0);
    BlochSpace space(line({0, 1}), Eigen::Vector2d(0, 0.3), 1);
    TorusSymbol v(2);
    v.add_cos({0, 1});
    auto pot = PotentialSpec::from_symbol(v);
    Eigen::VectorXcd u0(3);
    u0 << 0.2, 1.0, cd(0, 0.5);
    // Generator by hand: diag 1/2 (j - 0.3)^2, hopping 1/2 between neighbours.
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(3, 3);
    for (int j = -1; j <= 1; ++j) g(j + 1, j + 1) = 0.5 * (j - 0.3) * (j - 0.3);
    g(0, 1) = g(1, 0) = g(1, 2) = g(2, 1) = 0.5;
    std::vector<double> err;
    for (double t : {0.02, 0.01}) {
        Eigen::VectorXcd taylor = u0 - cd(0, t) * g * u0 - 0.5 * t * t * g * g * u0;
        LimitGenerator gen(space, model, sigma, pot);
        CHECK((gen.matrix() - g).norm() < 1e-14);
        err.push_back((gen.evolution(t) * u0 - taylor).norm());
    }
    CHECK(err[0] / err[1] == doctest::Approx(8.0).epsilon(0.02));
    CHECK_THROWS_AS(bloch_propagate(u0, 5.0, space, model, sigma, pot), TruncationError);
}

TEST_CASE("full-lattice limit flow equals the unit-h torus equation") {
    auto lap = HamiltonianModel::quadratic(2.0 * Eigen::MatrixXd::Identity(2, 2));
    TorusSymbol v(2);
    v.add_cos({1, 0}, [](const Eigen::VectorXd&) -> cd { return 0.8; }).add_cos({1, -1}, [](const Eigen::VectorXd&) -> cd {
        return 0.3;
    });
    auto pot = PotentialSpec::from_symbol(v);
    const int n = 10;
    BlochSpace space(SubmoduleBasis::full(2), Eigen::Vector2d::Zero(), n);
    FourierGrid grid(2, n, 1.0);
    FourierState u(grid);
    u.set({0, 0}, 1.0);
    u.set({1, 1}, cd(0, 0.5));
    u.set({-1, 0}, 0.3);
    u.normalize();
    Eigen::VectorXcd b(space.dim());
    for (long long i = 0; i < space.dim(); ++i) b[i] = u.at(space.labels()[i]);
    const double t = 0.5;
    Eigen::VectorXcd lim = LimitGenerator(space, lap, Eigen::Vector2d::Zero(), pot).evolution(t) * b;
    auto sim = perturbed_propagate(u, t, lap, pot, 1e-4);
    double err = 0.0;
    for (long long i = 0; i < space.dim(); ++i) err = std::max(err, std::abs(lim[i] - sim.at(space.labels()[i])));
    CHECK(err < 1e-8);
}

TEST_CASE("Heisenberg trace pairing") {
    auto model = half_laplacian();
    Eigen::Vector2d sigma(1, 0);
    BlochSpace space(line({0, 1}), Eigen::Vector2d(0, 0.1), 3);
    auto g = [](const Eigen::VectorXd& xi) -> cd { return 2.0 + xi[0]; };

    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(space.dim());
    e[space.index({0, 1})] = 1.0;
    auto m0 = BlochDensityOperator::pure(space, e);
    m0.validate();
    TorusSymbol mean(2);
    mean.add_term({0, 0}, 1.0, g);
    CHECK(heisenberg_trace_pairing(m0, 2.0, model, sigma, PotentialSpec::none(), mean) == doctest::Approx(3.0));

    // Two-mode superposition: oscillation at 1/2 [(l1 - w)^2 - (l2 - w)^2].
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space.dim());
    v[space.index({0, 2})] = 1.0;
    v[space.index({0, -1})] = 1.0;
    auto sup = BlochDensityOperator::pure(space, v);
    TorusSymbol wave(2);
    wave.add_term({0, 3}, 1.0);
    const double freq = 0.5 * ((2 - 0.1) * (2 - 0.1) - (-1 - 0.1) * (-1 - 0.1));
    for (double t : {0.0, 0.3, 1.1}) {
        // Tr(A M) = <v, A v> / |v|^2 with A moving mode -1 to mode 2.
        cd want = 0.5 * std::polar(1.0, freq * t);
        auto m = heisenberg_propagate(sup, t, model, sigma);
        cd got = (multiplication_matrix(space, wave, sigma) * m.matrix).trace();
        CHECK(std::abs(got - want) < 1e-13);
        CHECK(heisenberg_trace_pairing(sup, t, model, sigma, PotentialSpec::none(), wave) ==
              doctest::Approx(want.real()));
    }

    // Diagonal data is stationary without potential.
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(space.dim(), space.dim());
    for (long long i = 0; i < space.dim(); ++i) d(i, i) = 1.0 / space.dim();
    BlochDensityOperator diag{space, d};
    diag.validate();
    TorusSymbol any(2);
    any.add_cos({0, 1}, g).add_term({0, 2}, cd(0.3, 0.1));
    const double p0 = heisenberg_trace_pairing(diag, 0.0, model, sigma, PotentialSpec::none(), any);
    for (double t : {0.5, 3.0, 10.0})
        CHECK(heisenberg_trace_pairing(diag, t, model, sigma, PotentialSpec::none(), any) == doctest::Approx(p0));
}

TEST_CASE("Heisenberg flow preserves trace and spectrum") {
    auto model = half_laplacian();
    Eigen::Vector2d sigma(1, 0);
    BlochSpace space(line({0, 1}), Eigen::Vector2d(0, 0.4), 12);
    TorusSymbol v(2);
    v.add_cos({0, 1}, [](const Eigen::VectorXd&) -> cd { return 0.2; });
    auto pot = PotentialSpec::from_symbol(v);
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n;
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(space.dim(), 3);
    for (int c = 0; c < 3; ++c)
        for (int j = -2; j <= 2; ++j) x(space.index({0, j}), c) = cd(n(rng), n(rng));
    Eigen::MatrixXcd m = x * x.adjoint();
    m /= m.trace().real();
    BlochDensityOperator m0{space, m};
    m0.validate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e0(m);
    for (double t : {1.0, 4.0, 10.0}) {
        auto mt = heisenberg_propagate(m0, t, model, sigma, pot);
        mt.validate();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> et(mt.matrix);
        CHECK((et.eigenvalues() - e0.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("density operator from a K_h fiber") {
    const double h = 1.0 / 32;
    auto model = half_laplacian();
    ChartF chart(model, Eigen::Vector2d(1, 0), line({0, 1}), 1.0);
    CoherentParams p;
    p.xi0 = Eigen::Vector2d(1, 0);
    p.x0 = Eigen::Vector2d(0.5, 0.5);
    p.eps = 1.0;
    p.profile.scales = {3.0, 1.0};
    auto u = coherent_state(p, h);
    auto f = kh_transform(u, chart, MWindow::for_chart(chart));
    const auto& fib = f.fibers[f.dominant_fiber()];
    auto m0 = BlochDensityOperator::from_fiber(fib, chart.lambda(), 16);
    m0.validate();
    CHECK_THROWS_AS(BlochDensityOperator::from_fiber(fib, chart.lambda(), 1), TruncationError);
    BlochDensityOperator bad{m0.space, 2.0 * m0.matrix};
    CHECK_THROWS_AS(bad.validate(), PreconditionFailed);
}

TEST_CASE("compact pairing of a single fiber matches the two-micro compact part") {
    const double h = 1.0 / 16;
    auto model = half_laplacian();
    auto lam = line({0, 1});
    ChartF chart(model, Eigen::Vector2d(1.0, 0.0), lam, 1.0);
    FourierGrid g(2, 6, h, {16, 0});
    FourierState u(g);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (long long k2 = -3; k2 <= 3; ++k2) u.set({16, k2}, cd(n(rng), n(rng)));
    u.normalize();

    // xi-independent weights so that freezing at sigma is exact
    TwoMicroSymbol a(lam, 1.0);
    auto one = [](const Eigen::VectorXd&) { return cd(1.0); };
    EtaFunction core = [](const Eigen::VectorXd&, const Eigen::VectorXd& eta) {
        return cd(1.0 + 0.3 * eta[1] / (1.0 + eta.squaredNorm()));
    };
    a.add_term({0, 0}, 1.0, one, core);
    a.add_term({0, 1}, cd(0.4, 0.2), one, core);
    a.add_term({0, -2}, 0.25, one);
    const double r = 4.0;

    auto field = kh_transform(u, chart, MWindow::for_chart(chart));
    REQUIRE(field.fibers.size() == 1);
    auto m0 = BlochDensityOperator::from_fiber(field.fibers[0], lam, 12);
    for (double t : {0.0, 0.3, 1.1}) {
        auto ut = free_propagate(u, t / h, model);
        double full = two_micro_pairing(ut, a, chart, 1.0 / h, r, 1.0).compact_part;
        double lim = heisenberg_compact_pairing(m0, t, model, field.fibers[0].sigma, PotentialSpec::none(), a, r);
        CHECK(std::abs(full - lim) < 1e-12);
    }
    BlochSpace other(line({1, 0}), Eigen::Vector2d::Zero(), 2);
    CHECK_THROWS_AS(compact_symbol_matrix(other, a, Eigen::Vector2d(1, 0), r), ShapeError);
}
