#include "semiclass/hamiltonian.hpp"

#include <cmath>

#include "semiclass/errors.hpp"

namespace semiclass {

namespace {

bool is_even_integer(double a) { return a >= 2.0 && std::fmod(a, 2.0) == 0.0; }

void check_dim(const HamiltonianModel& m, const Eigen::VectorXd& xi) {
    if (xi.size() != m.dim()) throw SingularPoint("dimension mismatch for " + m.name());
}

}  // namespace

HamiltonianModel HamiltonianModel::quadratic(std::vector<RationalVector> a, RationalVector theta) {
    HamiltonianModel m;
    m.family_ = Family::Quadratic;
    m.dim_ = static_cast<int>(a.size());
    if (m.dim_ < 1 || m.dim_ > kMaxDim) throw DegenerateInput("dimension must be in 1..4");
    if (theta.empty()) theta.assign(m.dim_, mpq_class(0));
    if (static_cast<int>(theta.size()) != m.dim_) throw DegenerateInput("theta length mismatch");
    m.a_ = Eigen::MatrixXd(m.dim_, m.dim_);
    for (int i = 0; i < m.dim_; ++i) {
        if (static_cast<int>(a[i].size()) != m.dim_) throw DegenerateInput("A must be square");
        for (int j = 0; j < m.dim_; ++j) m.a_(i, j) = to_double(a[i][j]);
    }
    for (int i = 0; i < m.dim_; ++i)
        for (int j = 0; j < i; ++j)
            if (a[i][j] != a[j][i]) throw DegenerateInput("A must be symmetric");
    m.theta_ = to_eigen(theta);
    m.a_exact_ = std::move(a);
    m.theta_exact_ = std::move(theta);
    return m;
}

HamiltonianModel HamiltonianModel::quadratic(const Eigen::MatrixXd& a) {
    std::vector<RationalVector> rows(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) rows[i].emplace_back(a(i, j));
    return quadratic(rows, {});
}

HamiltonianModel HamiltonianModel::power(double alpha, int dim) {
    if (!(alpha > 0.0)) throw DegenerateInput("power exponent must be positive");
    if (dim < 1 || dim > kMaxDim) throw DegenerateInput("dimension must be in 1..4");
    HamiltonianModel m;
    m.family_ = Family::Power;
    m.dim_ = dim;
    m.alpha_ = alpha;
    return m;
}

HamiltonianModel HamiltonianModel::linear(const Eigen::VectorXd& omega) {
    HamiltonianModel m;
    m.family_ = Family::Linear;
    m.dim_ = static_cast<int>(omega.size());
    m.omega_ = omega;
    return m;
}

HamiltonianModel HamiltonianModel::saddle2d() {
    HamiltonianModel m;
    m.family_ = Family::Saddle2d;
    m.dim_ = 2;
    return m;
}

HamiltonianModel HamiltonianModel::cubic3d() {
    HamiltonianModel m;
    m.family_ = Family::Cubic3d;
    m.dim_ = 3;
    return m;
}

HamiltonianModel HamiltonianModel::shifted(const HamiltonianModel& base, const Eigen::VectorXd& offset) {
    if (offset.size() != base.dim()) throw DegenerateInput("offset length mismatch");
    HamiltonianModel m;
    m.family_ = Family::Shifted;
    m.dim_ = base.dim();
    m.base_ = std::make_shared<const HamiltonianModel>(base);
    m.offset_ = offset;
    return m;
}

std::string HamiltonianModel::name() const {
    switch (family_) {
        case Family::Quadratic: return "quadratic";
        case Family::Power: return "power";
        case Family::Linear: return "linear";
        case Family::Saddle2d: return "saddle2d";
        case Family::Cubic3d: return "cubic3d";
        case Family::Shifted: return "shifted";
    }
    return "unknown";
}

bool HamiltonianModel::is_quadratic() const {
    return family_ == Family::Quadratic || (family_ == Family::Power && alpha_ == 2.0) ||
           family_ == Family::Saddle2d || (family_ == Family::Shifted && base_->is_quadratic());
}

double HamiltonianModel::value(const Eigen::VectorXd& xi) const {
    switch (family_) {
        case Family::Quadratic: {
            const Eigen::VectorXd z = xi + theta_;
            return 0.5 * z.dot(a_ * z);
        }
        case Family::Power: {
            const double r2 = xi.squaredNorm();
            if (is_even_integer(alpha_)) return std::pow(r2, alpha_ / 2.0);
            if (r2 < 1e-16) throw SingularPoint("power family evaluated within 1e-8 of the origin");
            return std::pow(r2, alpha_ / 2.0);
        }
        case Family::Linear: return xi.dot(omega_);
        case Family::Saddle2d: return xi[0] * xi[0] - xi[1] * xi[1];
        case Family::Cubic3d: return xi[0] * xi[0] + xi[1] * xi[1] - xi[2] * xi[2] * xi[2];
        case Family::Shifted: return base_->value(xi + offset_);
    }
    return 0.0;
}

HamiltonianEval HamiltonianModel::evaluate(const Eigen::VectorXd& xi) const {
    check_dim(*this, xi);
    const int d = dim_;
    HamiltonianEval e;
    e.gradient = Eigen::VectorXd::Zero(d);
    e.hessian = Eigen::MatrixXd::Zero(d, d);
    switch (family_) {
        case Family::Quadratic: {
            const Eigen::VectorXd z = xi + theta_;
            e.gradient = a_ * z;
            e.value = 0.5 * z.dot(e.gradient);
            e.hessian = a_;
            break;
        }
        case Family::Power: {
            const double r2 = xi.squaredNorm();
            const double a = alpha_;
            if (!is_even_integer(a) && r2 < 1e-16)
                throw SingularPoint("power family evaluated within 1e-8 of the origin");
            e.value = std::pow(r2, a / 2.0);
            const double p2 = (a == 2.0) ? 1.0 : std::pow(r2, (a - 2.0) / 2.0);
            e.gradient = a * p2 * xi;
            e.hessian = a * p2 * Eigen::MatrixXd::Identity(d, d);
            if (a != 2.0) {
                const double p4 = (a == 4.0) ? 1.0 : std::pow(r2, (a - 4.0) / 2.0);
                e.hessian += a * (a - 2.0) * p4 * xi * xi.transpose();
            }
            break;
        }
        case Family::Linear:
            e.value = xi.dot(omega_);
            e.gradient = omega_;
            break;
        case Family::Saddle2d:
            e.value = xi[0] * xi[0] - xi[1] * xi[1];
            e.gradient << 2.0 * xi[0], -2.0 * xi[1];
            e.hessian(0, 0) = 2.0;
            e.hessian(1, 1) = -2.0;
            break;
        case Family::Cubic3d:
            e.value = xi[0] * xi[0] + xi[1] * xi[1] - xi[2] * xi[2] * xi[2];
            e.gradient << 2.0 * xi[0], 2.0 * xi[1], -3.0 * xi[2] * xi[2];
            e.hessian(0, 0) = 2.0;
            e.hessian(1, 1) = 2.0;
            e.hessian(2, 2) = -6.0 * xi[2];
            break;
        case Family::Shifted: return base_->evaluate(xi + offset_);
    }
    return e;
}

std::optional<RationalVector> HamiltonianModel::exact_gradient(const RationalVector& xi) const {
    const int d = dim_;
    if (static_cast<int>(xi.size()) != d) throw SingularPoint("dimension mismatch");
    RationalVector g(d, mpq_class(0));
    switch (family_) {
        case Family::Quadratic:
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) g[i] += a_exact_[i][j] * (xi[j] + theta_exact_[j]);
            return g;
        case Family::Power: {
            if (!is_even_integer(alpha_)) return std::nullopt;
            mpq_class r2 = 0;
            for (const auto& x : xi) r2 += x * x;
            const int m = static_cast<int>(alpha_ / 2.0);
            mpq_class p = 1;
            for (int i = 0; i < m - 1; ++i) p *= r2;
            for (int i = 0; i < d; ++i) g[i] = mpq_class(static_cast<long>(alpha_)) * p * xi[i];
            return g;
        }
        case Family::Saddle2d:
            g[0] = 2 * xi[0];
            g[1] = -2 * xi[1];
            return g;
        case Family::Cubic3d:
            g[0] = 2 * xi[0];
            g[1] = 2 * xi[1];
            g[2] = -3 * xi[2] * xi[2];
            return g;
        default: return std::nullopt;
    }
}

PointClass classify_point(const HamiltonianModel& model, const Eigen::VectorXd& xi, double tol) {
    const auto e = model.evaluate(xi);
    const int d = model.dim();
    PointClass pc;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.hessian);
    const auto& ev = es.eigenvalues();
    double minabs = std::abs(ev[0]);
    bool pos = false, neg = false;
    for (int i = 0; i < d; ++i) {
        minabs = std::min(minabs, std::abs(ev[i]));
        pos = pos || ev[i] > 0.0;
        neg = neg || ev[i] < 0.0;
    }
    pc.in_critical_set = minabs < tol || (pos && neg);
    Eigen::MatrixXd border = Eigen::MatrixXd::Zero(d + 1, d + 1);
    border.topLeftCorner(d, d) = e.hessian;
    border.block(0, d, d, 1) = e.gradient;
    border.block(d, 0, 1, d) = e.gradient.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(border);
    const auto& s = svd.singularValues();
    pc.isoenergetic_nondegenerate = s[0] > 0.0 && s[d] > tol * std::max(1.0, s[0]);
    return pc;
}

namespace {

SubmoduleBasis gradient_lattice(const HamiltonianModel& model, const Eigen::VectorXd& xi) {
    auto exact = model.exact_gradient(to_rational_vector(xi));
    if (exact) return annihilator_lattice(*exact);
    return resonance_classify(model.evaluate(xi).gradient, DetectMode{}).lattice;
}

bool contained(const SubmoduleBasis& small, const SubmoduleBasis& big) {
    for (const auto& b : small.hnf())
        if (!big.contains(b)) return false;
    return true;
}

// Lambda ∩ w^perp, computed through the relations of (b_j . w)_j.
SubmoduleBasis restrict_orthogonal(const SubmoduleBasis& lambda, const Eigen::VectorXd& w, double tol) {
    const int r = lambda.rank();
    const int d = lambda.dim();
    if (r == 0) return lambda;
    Eigen::VectorXd p = lambda.basis_matrix().transpose() * w;
    auto rel = resonance_classify(p, DetectMode{50, tol}).lattice;
    std::vector<IntVector> cols;
    for (const auto& c : rel.hnf()) {
        IntVector v(d, 0);
        for (int j = 0; j < r; ++j)
            for (int i = 0; i < d; ++i) v[i] += c[j] * lambda.hnf()[j][i];
        cols.push_back(v);
    }
    if (cols.empty()) return SubmoduleBasis::zero(d);
    return SubmoduleBasis::from_primitive(d, cols);
}

}  // namespace

bool check_assumption_A(const HamiltonianModel& model, const Eigen::VectorXd& xi,
                        const std::vector<ChainLink>& chain, double tol) {
    if (chain.empty()) return true;
    const auto e = model.evaluate(xi);
    const Eigen::MatrixXd& hess = e.hessian;
    const auto lambda1 = gradient_lattice(model, xi);
    if (chain[0].lattice != lambda1)
        throw PreconditionFailed("Lambda_1 differs from the annihilator of dH(xi)");
    for (size_t i = 0; i < chain.size(); ++i) {
        const auto& link = chain[i];
        if (link.lattice.rank() == 0) throw PreconditionFailed("Lambda_" + std::to_string(i + 1) + " is trivial");
        if (i == 0) {
            const Eigen::MatrixXd b = lambda1.basis_matrix();
            const Eigen::VectorXd c = (b.transpose() * b).ldlt().solve(b.transpose() * link.eta);
            if ((b * c - link.eta).norm() > tol * std::max(1.0, link.eta.norm()))
                throw PreconditionFailed("eta_1 not in <Lambda_1>");
            if (link.eta.norm() <= tol) throw PreconditionFailed("eta_1 is zero");
            continue;
        }
        const auto& prev = chain[i - 1];
        const Eigen::VectorXd w = hess * prev.eta;
        if (!contained(link.lattice, prev.lattice) || link.lattice.rank() >= prev.lattice.rank())
            throw PreconditionFailed("chain is not strictly decreasing at " + std::to_string(i + 1));
        if (restrict_orthogonal(prev.lattice, w, tol) != link.lattice)
            throw PreconditionFailed("Lambda_" + std::to_string(i + 1) + " differs from (d2H eta)^perp ∩ Lambda");
        if (std::abs(link.eta.dot(w)) > tol)
            throw PreconditionFailed("eta_" + std::to_string(i + 1) + " not orthogonal to d2H eta");
        bool outside = false;
        for (const auto& b : prev.lattice.hnf())
            outside = outside || std::abs(link.eta.dot(hess * to_eigen(b))) > tol;
        if (!outside) throw PreconditionFailed("eta_" + std::to_string(i + 1) + " lies in (d2H Lambda)^perp");
    }
    const auto& last = chain.back();
    const Eigen::VectorXd w = hess * last.eta;
    for (const auto& b : last.lattice.hnf())
        if (std::abs(to_eigen(b).dot(w)) > tol) return true;
    return false;
}

}  // namespace semiclass
