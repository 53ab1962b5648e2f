#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "semiclass/errors.hpp"
#include "semiclass/quantization.hpp"
#include "oracles.hpp"

using namespace semiclass;
using oracle::as_vector;
using oracle::random_state;
using oracle::random_symbol;

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre rule on [a, b] via the Golub-Welsch eigenproblem.
std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    std::vector<std::pair<double, double>> r;
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()[i];
        double w = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
        r.emplace_back(0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w);
    }
    return r;
}

FourierState packet(double h, int k0, double width, int radius) {
    FourierGrid g(1, radius, h, {k0});
    FourierState u(g);
    for (long long i = 0; i < g.size(); ++i) {
        double k = static_cast<double>(g.mode(i)[0] - k0);
        u.coeffs()[i] = std::exp(-k * k / (2 * width * width)) * std::polar(1.0, 0.7 * k);
    }
    u.normalize();
    return u;
}

}  // namespace

TEST_CASE("grid indexing round trip") {
    FourierGrid g(3, 2, 0.1, {5, -1, 0});
    CHECK(g.size() == 125);
    for (long long i = 0; i < g.size(); ++i) CHECK(g.index(g.mode(i)) == i);
    CHECK(g.index({8, 0, 0}) == -1);
    CHECK(g.contains({7, -3, 2}));
}

TEST_CASE("weyl_apply single-mode and Fourier-diagonal cases") {
    FourierGrid g(2, 3, 0.25);
    std::mt19937_64 rng(1);
    auto u = random_state(g, rng);
    auto shifted = weyl_apply(plane_wave_symbol(2, {1, -2}), u);
    for (long long i = 0; i < g.size(); ++i) {
        IVec k = g.mode(i);
        CHECK(std::abs(shifted.at({k[0] + 1, k[1] - 2}) - u.coeffs()[i]) < 1e-14);
    }
    TorusSymbol diag(2);
    diag.add_term({0, 0}, 1.0, [](const Eigen::VectorXd& xi) { return cd(std::sin(xi[0]) + xi[1] * xi[1]); });
    auto v = weyl_apply(diag, u);
    for (long long i = 0; i < g.size(); ++i) {
        IVec k = g.mode(i);
        double a = std::sin(0.25 * k[0]) + std::pow(0.25 * k[1], 2);
        CHECK(std::abs(v.at(k) - a * u.coeffs()[i]) < 1e-14);
    }
}

TEST_CASE("weyl_apply and pairing match the dense oracle") {
    std::mt19937_64 rng(42);
    for (int d : {1, 2}) {
        const int n = d == 1 ? 8 : 4;
        FourierGrid g(d, n, 0.3);
        auto a = random_symbol(d, 2, rng);
        auto u = random_state(g, rng);
        FourierGrid out(d, n + 2, 0.3);
        Eigen::MatrixXcd m = oracle::dense_weyl(a, g, out);
        Eigen::VectorXcd expect = m * as_vector(u);
        auto got = weyl_apply(a, u);
        REQUIRE(got.grid() == out);
        CHECK((as_vector(got) - expect).cwiseAbs().maxCoeff() < 1e-12);

        Eigen::MatrixXcd sq = oracle::dense_weyl(a, g, g);
        cd pair = as_vector(u).dot(sq * as_vector(u));
        CHECK(std::abs(wigner_pairing_complex(u, a) - pair) < 1e-12);
        PairingKernel kernel(g, a);
        CHECK(std::abs(kernel.pair(u.coeffs()) - pair) < 1e-12);
    }
}

TEST_CASE("pairing of real symbols is real") {
    std::mt19937_64 rng(3);
    FourierGrid g(2, 5, 0.1);
    auto u = random_state(g, rng);
    TorusSymbol a(2);
    a.add_cos({1, 0}, [](const Eigen::VectorXd& xi) { return cd(std::exp(-xi.squaredNorm())); });
    a.add_sin({1, -1}, [](const Eigen::VectorXd& xi) { return cd(xi[0]); });
    CHECK(std::abs(wigner_pairing_complex(u, a).imag()) < 1e-13);
}

TEST_CASE("plane wave pairings") {
    FourierGrid g(2, 2, 0.125, {8, 0});
    FourierState u(g);
    u.set({8, 1}, 1.0);
    TorusSymbol a(2);
    a.add_term({0, 0}, 1.0, [](const Eigen::VectorXd& xi) { return cd(xi[0] + 3 * xi[1]); });
    a.add_cos({0, 1}, [](const Eigen::VectorXd&) { return cd(5.0); });
    // Only the torus mean survives, evaluated at h k0 = (1, 1/8).
    CHECK(wigner_pairing(u, a) == doctest::Approx(1.0 + 3 * 0.125).epsilon(1e-14));
}

TEST_CASE("free propagation") {
    auto h2 = HamiltonianModel::quadratic(2.0 * Eigen::MatrixXd::Identity(1, 1));
    FourierGrid g(1, 4, 0.25);
    FourierState u(g);
    u.set({2}, 1.0);
    auto v = free_propagate(u, kPi / 4, h2);
    CHECK(std::abs(std::arg(v.at({2})) - (-kPi / 4)) < 1e-14);
    CHECK(std::abs(v.at({2})) == doctest::Approx(1.0));

    std::mt19937_64 rng(9);
    auto w = random_state(FourierGrid(2, 6, 0.1), rng);
    auto q = HamiltonianModel::power(4.0, 2);
    auto a = free_propagate(free_propagate(w, 0.3, q), 0.45, q);
    auto b = free_propagate(w, 0.75, q);
    CHECK((as_vector(a) - as_vector(b)).norm() < 1e-12);
    CHECK(std::abs(b.norm() - 1.0) < 1e-12);
    CHECK((as_vector(free_propagate(w, 0.0, q)) - as_vector(w)).norm() == 0.0);
}

TEST_CASE("perturbed propagation") {
    auto h2 = HamiltonianModel::quadratic(2.0 * Eigen::MatrixXd::Identity(1, 1));
    const double h = 1.0 / 32;
    auto u = packet(h, 32, 3.0, 40);

    auto zero = perturbed_propagate(u, 1.0, h2, PotentialSpec::none(), 1e-2);
    CHECK((as_vector(zero) - as_vector(free_propagate(u, 1.0, h2))).norm() < 1e-14);

    auto c = PotentialSpec::from_function([](double, const Eigen::VectorXd&) { return 2.5; }, 2.5);
    auto pc = perturbed_propagate(u, 1.0, h2, c, 1e-2);
    Eigen::VectorXcd expect = as_vector(free_propagate(u, 1.0, h2)) * std::polar(1.0, -h * 1.0 * 2.5);
    CHECK((as_vector(pc) - expect).norm() < 1e-12);

    auto cosv = PotentialSpec::from_function([](double, const Eigen::VectorXd& x) { return std::cos(x[0]); }, 1.0);
    auto r1 = perturbed_propagate(u, 1.0, h2, cosv, 1e-2);
    auto r2 = perturbed_propagate(u, 1.0, h2, cosv, 5e-3);
    auto r3 = perturbed_propagate(u, 1.0, h2, cosv, 2.5e-3);
    double e1 = (as_vector(r1) - as_vector(r2)).norm();
    double e2 = (as_vector(r2) - as_vector(r3)).norm();
    CHECK(std::log2(e1 / e2) >= 1.9);
    auto fine = perturbed_propagate(u, 1.0, h2, cosv, 1e-3);
    CHECK(std::abs(fine.norm() - 1.0) < 1e-8);

    // The pseudodifferential path with a multiplication symbol agrees with the
    // multiplication path to the splitting accuracy.
    TorusSymbol vs(1);
    vs.add_cos({1});
    auto pd = perturbed_propagate(u, 1.0, h2, PotentialSpec::pseudodifferential(vs, 1.0), 1e-3);
    CHECK((as_vector(pd) - as_vector(fine)).norm() < 1e-8);
    auto fs = perturbed_propagate(u, 1.0, h2, PotentialSpec::from_symbol(vs), 1e-3);
    CHECK((as_vector(fs) - as_vector(fine)).norm() < 1e-12);
}

TEST_CASE("position density") {
    FourierGrid g(2, 3, 0.1);
    FourierState pw(g);
    pw.set({1, 2}, 1.0);
    auto dens = position_density(pw, 16);
    for (double v : dens) CHECK(v == doctest::Approx(1.0 / (4 * kPi * kPi)).epsilon(1e-12));

    FourierState two(g);
    two.set({0, 0}, std::sqrt(0.5));
    two.set({1, 0}, std::sqrt(0.5));
    auto d2 = position_density(two, 8);
    for (int i = 0; i < 8; ++i) {
        double x = 2 * kPi * i / 8;
        double expect = 2 * std::pow(std::cos(x / 2), 2) / (4 * kPi * kPi);
        CHECK(d2[i * 8 + 3] == doctest::Approx(expect).epsilon(1e-12));
    }

    // Coarse resolution still samples exactly (folding).
    std::mt19937_64 rng(4);
    auto u = random_state(FourierGrid(1, 20, 0.1, {7}), rng);
    auto coarse = position_density(u, 8);
    for (int j = 0; j < 8; ++j) {
        double x = 2 * kPi * j / 8;
        cd s = 0.0;
        for (long long i = 0; i < u.grid().size(); ++i)
            s += u.coeffs()[i] * std::exp(cd(0.0, static_cast<double>(u.grid().mode(i)[0]) * x));
        CHECK(coarse[j] == doctest::Approx(std::norm(s) / (2 * kPi)).epsilon(1e-10));
    }
    auto fine = position_density(u, 64);
    double sum = 0.0;
    for (double v : fine) sum += v * 2 * kPi / 64;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("projection identity and region masses") {
    std::mt19937_64 rng(8);
    FourierGrid g(2, 6, 0.05, {3, -2});
    auto u = random_state(g, rng);
    const int res = 64;
    auto dens = position_density(u, res);
    const double cell = std::pow(2 * kPi / res, 2);

    TorusSymbol chi(2);
    chi.add_cos({1, 0}).add_cos({0, 2}).add_term({0, 0}, 0.3 / (2 * kPi));
    double quad = 0.0;
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) {
            Eigen::Vector2d x(2 * kPi * i / res, 2 * kPi * j / res);
            quad += chi.evaluate(x, Eigen::Vector2d::Zero()).real() * dens[i * res + j] * cell;
        }
    CHECK(std::abs(wigner_pairing(u, chi) - quad) < 1e-10);

    // Slab and box masses against fine midpoint quadrature of the exact density.
    auto density_at = [&](const Eigen::Vector2d& x) {
        cd s = 0.0;
        for (long long i = 0; i < g.size(); ++i) s += u.coeffs()[i] * std::exp(cd(0.0, to_eigen(g.mode(i)).dot(x)));
        return std::norm(s) / (4 * kPi * kPi);
    };
    const int fine = 400;
    double slab = 0.0;
    for (int i = 0; i < fine; ++i)
        for (int j = 0; j < fine; ++j) {
            Eigen::Vector2d x(2 * kPi * (i + 0.5) / fine, 2 * kPi * (j + 0.5) / fine);
            double t = std::remainder(x[0] - x[1] - 0.4, 2 * kPi);
            if (std::abs(t) < 0.5) slab += density_at(x) * std::pow(2 * kPi / fine, 2);
        }
    double box = 0.0;
    for (const auto& [x1, w] : gauss_legendre(40, 0.0, kPi))
        for (int j = 0; j < 32; ++j) box += w * (2 * kPi / 32) * density_at(Eigen::Vector2d(x1, 2 * kPi * j / 32));
    CHECK(box_mass(u, Eigen::Vector2d(0, 0), Eigen::Vector2d(kPi, 2 * kPi)) == doctest::Approx(box).epsilon(1e-12));
    CHECK(slab_mass(u, {1, -1}, 0.4, 0.5) == doctest::Approx(slab).epsilon(5e-3));
    CHECK(slab_mass(u, {1, 0}, 1.0, kPi) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("time averages of momentum symbols are conserved") {
    auto model = HamiltonianModel::power(4.0, 2);
    std::mt19937_64 rng(6);
    auto u = random_state(FourierGrid(2, 5, 0.1, {10, 0}), rng);
    TorusSymbol a(2);
    a.add_term({0, 0}, 1.0, [](const Eigen::VectorXd& xi) { return cd(std::exp(-xi.squaredNorm())); });
    double s = wigner_pairing(u, a);
    for (auto shape : {WindowShape::Box, WindowShape::Gaussian}) {
        TimeWindow w{0.0, 2.0, 16, shape};
        CHECK(time_averaged_pairing(u, a, model, PotentialSpec::none(), 37.0, w) == doctest::Approx(s).epsilon(1e-12));
    }
    auto nodes = window_weights(TimeWindow{0.0, 1.0, 4});
    REQUIRE(nodes.size() == 5);
    CHECK(nodes[0].second == doctest::Approx(0.125));
    CHECK(nodes[2].second == doctest::Approx(0.25));
}

TEST_CASE("truncation errors") {
    FourierGrid g(1, 3, 0.1);
    FourierState u(g);
    u.set({3}, 1.0);
    CHECK_THROWS_AS(weyl_apply(plane_wave_symbol(1, {1}), u, g, 0.0), TruncationError);
    auto big = u.regrid(FourierGrid(1, 5, 0.1));
    CHECK(big.at({3}) == cd(1.0));
    CHECK_THROWS_AS(big.regrid(FourierGrid(1, 2, 0.1)), TruncationError);
}
