#include <random>

#include "doctest.h"
#include "semiclass/errors.hpp"
#include "semiclass/hamiltonian.hpp"

using namespace semiclass;

namespace {

HamiltonianEval central_differences(const HamiltonianModel& m, const Eigen::VectorXd& xi, double step) {
    const int d = static_cast<int>(xi.size());
    HamiltonianEval e;
    e.value = m.value(xi);
    e.gradient.resize(d);
    e.hessian.resize(d, d);
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd ei = Eigen::VectorXd::Unit(d, i) * step;
        e.gradient[i] = (m.value(xi + ei) - m.value(xi - ei)) / (2 * step);
        for (int j = 0; j < d; ++j) {
            Eigen::VectorXd ej = Eigen::VectorXd::Unit(d, j) * step;
            e.hessian(i, j) = (m.value(xi + ei + ej) - m.value(xi + ei - ej) - m.value(xi - ei + ej) +
                               m.value(xi - ei - ej)) /
                              (4 * step * step);
        }
    }
    return e;
}

std::vector<HamiltonianModel> families() {
    Eigen::Matrix3d a;
    a << 2, 0.5, 0, 0.5, 1, 0.25, 0, 0.25, 3;
    return {HamiltonianModel::quadratic({{mpq_class(1), mpq_class(0)}, {mpq_class(0), mpq_class(1)}},
                                        {mpq_class(1, 3), mpq_class(0)}),
            HamiltonianModel::quadratic(Eigen::MatrixXd(a)),
            HamiltonianModel::power(4.0, 2),
            HamiltonianModel::power(3.0, 3),
            HamiltonianModel::linear(Eigen::Vector2d(1.0, std::sqrt(2.0))),
            HamiltonianModel::saddle2d(),
            HamiltonianModel::cubic3d(),
            HamiltonianModel::shifted(HamiltonianModel::power(4.0, 2), Eigen::Vector2d(0.01, -0.02))};
}

}  // namespace

TEST_CASE("evaluate examples") {
    auto q = HamiltonianModel::quadratic(Eigen::MatrixXd::Identity(2, 2));
    auto e = q.evaluate(Eigen::Vector2d(1, 0));
    CHECK(e.value == doctest::Approx(0.5));
    CHECK(e.gradient.isApprox(Eigen::Vector2d(1, 0)));
    CHECK(e.hessian.isApprox(Eigen::Matrix2d::Identity()));

    auto p = HamiltonianModel::power(4.0, 2).evaluate(Eigen::Vector2d(1, 0));
    CHECK(p.value == doctest::Approx(1.0));
    CHECK(p.gradient.isApprox(Eigen::Vector2d(4, 0)));
    Eigen::Matrix2d hp;
    hp << 12, 0, 0, 4;
    CHECK(p.hessian.isApprox(hp));

    auto c = HamiltonianModel::cubic3d();
    Eigen::Vector3d xi(0, 0, 1);
    auto ce = c.evaluate(xi);
    auto fd = central_differences(c, xi, 1e-5);
    CHECK(ce.value == doctest::Approx(-1.0));
    CHECK((ce.gradient - fd.gradient).norm() < 1e-7);
    CHECK((ce.hessian - fd.hessian).norm() < 1e-4);
    CHECK(ce.gradient.isApprox(Eigen::Vector3d(0, 0, -3)));
    CHECK(ce.hessian.isApprox(Eigen::Vector3d(2, 2, -6).asDiagonal().toDenseMatrix()));

    CHECK_THROWS_AS(HamiltonianModel::power(3.0, 2).evaluate(Eigen::Vector2d(0, 0)), SingularPoint);
    CHECK_NOTHROW(HamiltonianModel::power(4.0, 2).evaluate(Eigen::Vector2d(0, 0)));
}

TEST_CASE("derivatives agree with finite differences") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const auto& m : families()) {
        for (int i = 0; i < 100; ++i) {
            Eigen::VectorXd xi(m.dim());
            for (int j = 0; j < m.dim(); ++j) xi[j] = u(rng);
            if (xi.norm() < 0.2) continue;
            auto e = m.evaluate(xi);
            auto g = central_differences(m, xi, 1e-5);
            auto h = central_differences(m, xi, 1e-4);
            double gs = std::max(1.0, e.gradient.norm());
            double hs = std::max(1.0, e.hessian.norm());
            CHECK((e.gradient - g.gradient).norm() / gs < 1e-6);
            CHECK((e.hessian - h.hessian).norm() / hs < 1e-6);
        }
    }
}

TEST_CASE("exact gradient for rational quadratic data") {
    auto q = HamiltonianModel::quadratic({{mpq_class(2), mpq_class(1)}, {mpq_class(1), mpq_class(3)}},
                                         {mpq_class(0), mpq_class(1, 2)});
    auto g = q.exact_gradient({mpq_class(1, 3), mpq_class(-1)});
    REQUIRE(g.has_value());
    // A (xi + theta) = [[2,1],[1,3]] (1/3, -1/2)
    CHECK((*g)[0] == mpq_class(1, 6));
    CHECK((*g)[1] == mpq_class(-7, 6));
    auto lam = resonance_classify(*g);
    for (long long a = -8; a <= 8; ++a)
        for (long long b = -8; b <= 8; ++b) {
            mpq_class s = (*g)[0] * static_cast<long>(a) + (*g)[1] * static_cast<long>(b);
            CHECK(lam.lattice.contains(IVec{a, b}) == (s == 0));
        }
    CHECK_THROWS(HamiltonianModel::quadratic({{mpq_class(1), mpq_class(2)}, {mpq_class(0), mpq_class(1)}},
                                             {mpq_class(0), mpq_class(0)}));
}

TEST_CASE("classify point") {
    auto q = HamiltonianModel::quadratic(Eigen::MatrixXd::Identity(2, 2));
    auto a = classify_point(q, Eigen::Vector2d(1, 0.5));
    CHECK_FALSE(a.in_critical_set);
    CHECK(a.isoenergetic_nondegenerate);
    CHECK(classify_point(HamiltonianModel::saddle2d(), Eigen::Vector2d(1, 2)).in_critical_set);
    auto p = HamiltonianModel::power(4.0, 2);
    CHECK(classify_point(p, Eigen::Vector2d(0, 0)).in_critical_set);
    CHECK_FALSE(classify_point(p, Eigen::Vector2d(1, 0)).in_critical_set);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3, 3);
    Eigen::Matrix3d m;
    m << 3, 1, 0, 1, 2, 0.5, 0, 0.5, 1;
    auto def = HamiltonianModel::quadratic(Eigen::MatrixXd(m));
    for (int i = 0; i < 50; ++i) CHECK_FALSE(classify_point(def, Eigen::Vector3d(u(rng), u(rng), u(rng))).in_critical_set);
}

TEST_CASE("assumption A checker") {
    auto q = HamiltonianModel::quadratic(Eigen::MatrixXd::Identity(2, 2));
    auto axis = SubmoduleBasis::from_primitive(2, {to_int_vector(IVec{0, 1})});
    CHECK(check_assumption_A(q, Eigen::Vector2d(1, 0), {{axis, Eigen::Vector2d(0, 1)}}));
    CHECK(check_assumption_A(q, Eigen::Vector2d(1, 0), {}));

    // Saddle at (1,1): dH = (2,-2) is annihilated by (1,1); eta along (1,1)
    // gives d2H eta = (2,-2), orthogonal to (1,1).
    auto s = HamiltonianModel::saddle2d();
    auto diag = SubmoduleBasis::from_primitive(2, {to_int_vector(IVec{1, 1})});
    CHECK_FALSE(check_assumption_A(s, Eigen::Vector2d(1, 1), {{diag, Eigen::Vector2d(1, 1)}}));

    // The antidiagonal is not the resonance lattice of (1,1) for the saddle.
    auto anti = SubmoduleBasis::from_primitive(2, {to_int_vector(IVec{1, -1})});
    CHECK_THROWS_AS(check_assumption_A(s, Eigen::Vector2d(1, 1), {{anti, Eigen::Vector2d(1, -1)}}),
                    PreconditionFailed);
    // eta outside the span of Lambda_1.
    CHECK_THROWS_AS(check_assumption_A(q, Eigen::Vector2d(1, 0), {{axis, Eigen::Vector2d(1, 1)}}), PreconditionFailed);
}
