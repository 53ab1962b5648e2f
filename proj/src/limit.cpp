#include "semiclass/limit.hpp"

#include <cmath>
#include <numbers>

#include "semiclass/errors.hpp"

namespace semiclass {

namespace {

constexpr double kPi = std::numbers::pi;

double norm_factor(int d) { return std::pow(2.0 * kPi, -0.5 * d); }

void check_admissible(const BlochSpace& space, const HamiltonianModel& model, const Eigen::VectorXd& sigma) {
    if (sigma.size() != model.dim() || space.lambda().dim() != model.dim())
        throw ShapeError("sigma, model and lattice dimensions differ");
    if (space.lambda().rank() == 0) return;
    Eigen::VectorXd r = space.lambda().basis_matrix().transpose() * model.evaluate(sigma).gradient;
    if (r.lpNorm<Eigen::Infinity>() > 1e-8) throw PreconditionFailed("dH(sigma) is not orthogonal to Lambda");
}

}  // namespace

TorusSymbol averaged_symbol(const TorusSymbol& a, const SubmoduleBasis& lambda) {
    if (a.dim() != lambda.dim()) throw ShapeError("symbol and lattice dimensions differ");
    TorusSymbol out(a.dim());
    for (const auto& m : a.modes())
        if (lambda.contains(m.k)) out.add_mode(m.k, m.fhat);
    return out;
}

OrbitMeasureSpec OrbitMeasureSpec::make(const HamiltonianModel& model, Eigen::VectorXd x0, Eigen::VectorXd xi0,
                                        std::optional<DetectMode> mode) {
    if (x0.size() != model.dim() || xi0.size() != model.dim()) throw ShapeError("orbit data has wrong dimension");
    OrbitMeasureSpec s;
    Eigen::VectorXd grad = model.evaluate(xi0).gradient;
    if (!mode) {
        if (auto exact = model.exact_gradient(to_rational_vector(xi0)))
            s.lambda0 = resonance_classify(*exact).lattice;
        else
            s.lambda0 = resonance_classify(grad, DetectMode{}).lattice;
    } else {
        s.lambda0 = resonance_classify(grad, *mode).lattice;
    }
    s.x0 = std::move(x0);
    s.xi0 = std::move(xi0);
    return s;
}

double orbit_measure_pairing(const OrbitMeasureSpec& spec, const TorusSymbol& a) {
    cd s = 0.0;
    for (const auto& m : a.modes())
        if (spec.lambda0.contains(m.k)) s += m.fhat(spec.xi0) * std::polar(1.0, to_eigen(m.k).dot(spec.x0));
    return (s * norm_factor(a.dim())).real();
}

// ---------------------------------------------------------------- Bloch space

BlochSpace::BlochSpace(SubmoduleBasis lambda, Eigen::VectorXd omega, int radius)
    : lambda_(std::move(lambda)), omega_(std::move(omega)), radius_(radius) {
    const int d = lambda_.dim();
    const int r = lambda_.rank();
    if (omega_.size() != d) throw ShapeError("omega has wrong dimension");
    if (radius_ < 0) throw DegenerateInput("window radius must be nonnegative");
    const Eigen::MatrixXd b = lambda_.basis_matrix();
    IVec c(r, -radius_);
    while (true) {
        IVec label(d, 0);
        for (int j = 0; j < r; ++j)
            for (int i = 0; i < d; ++i) label[i] += c[j] * static_cast<long long>(std::llround(b(i, j)));
        index_[label] = static_cast<long long>(labels_.size());
        labels_.push_back(label);
        coords_.push_back(c);
        int p = 0;
        while (p < r && c[p] == radius_) c[p++] = -radius_;
        if (p == r) break;
        ++c[p];
    }
}

long long BlochSpace::index(const IVec& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? -1 : it->second;
}

Eigen::VectorXd BlochSpace::mode(long long i) const { return to_eigen(labels_.at(i)) - omega_; }

std::vector<long long> BlochSpace::edge() const {
    std::vector<long long> e;
    for (size_t i = 0; i < coords_.size(); ++i)
        for (long long v : coords_[i])
            if (std::abs(v) == radius_) {
                e.push_back(static_cast<long long>(i));
                break;
            }
    return e;
}

void BlochDensityOperator::validate(double tol) const {
    if (matrix.rows() != space.dim() || matrix.cols() != space.dim()) throw ShapeError("density matrix size");
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > std::min(tol, 1e-12) * std::max(1.0, matrix.norm()))
        throw PreconditionFailed("density operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) throw PreconditionFailed("density operator is not positive");
    if (std::abs(matrix.trace().real() - 1.0) > tol) throw PreconditionFailed("density operator trace is not 1");
}

BlochDensityOperator BlochDensityOperator::pure(const BlochSpace& space, const Eigen::VectorXcd& v) {
    if (v.size() != space.dim()) throw ShapeError("vector size differs from the Bloch window");
    const double n = v.norm();
    if (!(n > 0)) throw DegenerateInput("zero vector");
    Eigen::VectorXcd u = v / n;
    return {space, u * u.adjoint()};
}

BlochDensityOperator BlochDensityOperator::from_fiber(const KhFiber& fiber, const SubmoduleBasis& lambda, int radius) {
    BlochSpace space(lambda, fiber.omega, radius);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(space.dim());
    for (size_t j = 0; j < fiber.labels.size(); ++j) {
        long long i = space.index(fiber.labels[j]);
        if (i < 0) throw TruncationError("fiber mode outside the Bloch window; increase the window radius");
        v[i] = fiber.amplitudes[j];
    }
    return pure(space, v);
}

// ---------------------------------------------------------------- generator

Eigen::MatrixXcd multiplication_matrix(const BlochSpace& space, const TorusSymbol& a, const Eigen::VectorXd& sigma) {
    const auto n = space.dim();
    const TorusSymbol avg = averaged_symbol(a, space.lambda());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const double nf = norm_factor(a.dim());
    for (const auto& mode : avg.modes()) {
        const cd v = nf * mode.fhat(sigma);
        if (v == cd(0.0)) continue;
        for (long long j = 0; j < n; ++j) {
            IVec target = space.labels()[j];
            for (size_t t = 0; t < target.size(); ++t) target[t] += mode.k[t];
            long long i = space.index(target);
            if (i >= 0) m(i, j) += v;
        }
    }
    return m;
}

LimitGenerator::LimitGenerator(const BlochSpace& space, const HamiltonianModel& model, const Eigen::VectorXd& sigma,
                               const PotentialSpec& v) {
    check_admissible(space, model, sigma);
    const auto n = space.dim();
    const Eigen::MatrixXd hess = model.evaluate(sigma).hessian;
    g_ = Eigen::MatrixXcd::Zero(n, n);
    for (long long i = 0; i < n; ++i) {
        Eigen::VectorXd mu = space.mode(i);
        g_(i, i) = 0.5 * mu.dot(hess * mu);
    }
    bool diagonal = true;
    if (v.kind != PotentialSpec::Kind::None) {
        if (v.symbol.modes().empty()) throw PreconditionFailed("the limit flow needs the potential's Fourier symbol");
        if (!v.time_independent) throw PreconditionFailed("the limit flow supports time-independent potentials");
        const TorusSymbol avg = averaged_symbol(v.symbol, space.lambda());
        const Eigen::MatrixXd w = space.lambda().dual_matrix();
        for (const auto& mode : avg.modes()) {
            if (space.lambda().rank() == 0) break;
            Eigen::VectorXd c = w.transpose() * to_eigen(mode.k);
            if (c.lpNorm<Eigen::Infinity>() > 2.0 * space.radius())
                throw TruncationError("potential hops beyond the Bloch window");
        }
        Eigen::MatrixXcd vm = multiplication_matrix(space, v.symbol, sigma);
        g_ += 0.5 * (vm + vm.adjoint());
        diagonal = vm.isZero(0.0);
    }
    if (diagonal) {
        evals_ = g_.diagonal().real();
        evecs_ = Eigen::MatrixXcd::Identity(n, n);
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g_);
        evals_ = es.eigenvalues();
        evecs_ = es.eigenvectors();
    }
}

Eigen::MatrixXcd LimitGenerator::evolution(double t) const {
    Eigen::VectorXcd ph(evals_.size());
    for (Eigen::Index i = 0; i < evals_.size(); ++i) ph[i] = std::polar(1.0, -t * evals_[i]);
    return evecs_ * ph.asDiagonal() * evecs_.adjoint();
}

Eigen::VectorXcd bloch_propagate(const Eigen::VectorXcd& v, double t, const BlochSpace& space,
                                 const HamiltonianModel& model, const Eigen::VectorXd& sigma, const PotentialSpec& pot) {
    if (v.size() != space.dim()) throw ShapeError("vector size differs from the Bloch window");
    LimitGenerator gen(space, model, sigma, pot);
    Eigen::VectorXcd out = gen.evolution(t) * v;
    if (pot.kind != PotentialSpec::Kind::None) {
        double edge = 0.0;
        for (long long i : space.edge()) edge += std::norm(out[i]);
        if (edge > 1e-10 * std::max(1.0, v.squaredNorm()))
            throw TruncationError("Bloch window edge mass " + std::to_string(edge));
    }
    return out;
}

BlochDensityOperator heisenberg_propagate(const BlochDensityOperator& m0, double t, const HamiltonianModel& model,
                                          const Eigen::VectorXd& sigma, const PotentialSpec& pot) {
    LimitGenerator gen(m0.space, model, sigma, pot);
    const Eigen::MatrixXcd u = gen.evolution(t);
    BlochDensityOperator m{m0.space, u * m0.matrix * u.adjoint()};
    if (pot.kind != PotentialSpec::Kind::None) {
        double edge = 0.0;
        for (long long i : m.space.edge()) edge += m.matrix(i, i).real();
        if (edge > 1e-10) throw TruncationError("Bloch window edge mass " + std::to_string(edge));
    }
    return m;
}

double heisenberg_trace_pairing(const BlochDensityOperator& m0, double t, const HamiltonianModel& model,
                                const Eigen::VectorXd& sigma, const PotentialSpec& pot, const TorusSymbol& a) {
    auto m = heisenberg_propagate(m0, t, model, sigma, pot);
    return (multiplication_matrix(m.space, a, sigma) * m.matrix).trace().real();
}

Eigen::MatrixXcd compact_symbol_matrix(const BlochSpace& space, const TwoMicroSymbol& a, const Eigen::VectorXd& sigma,
                                       double r) {
    if (a.lambda() != space.lambda()) throw ShapeError("symbol and Bloch space use different lattices");
    if (!(r > 0)) throw DegenerateInput("R must be positive");
    const auto n = space.dim();
    const double nf = norm_factor(a.dim());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& mode : a.modes()) {
        const cd w = nf * mode.weight(sigma);
        if (w == cd(0.0)) continue;
        for (long long j = 0; j < n; ++j) {
            IVec target = space.labels()[j];
            for (size_t t = 0; t < target.size(); ++t) target[t] += mode.k[t];
            const long long i = space.index(target);
            if (i < 0) continue;
            const Eigen::VectorXd eta = 0.5 * (space.mode(i) + space.mode(j));
            const double cut = chi_bump(eta.norm() / r);
            if (cut == 0.0) continue;
            m(i, j) += w * cut * (mode.core ? mode.core(sigma, eta) : cd(1.0));
        }
    }
    return m;
}

double heisenberg_compact_pairing(const BlochDensityOperator& m0, double t, const HamiltonianModel& model,
                                  const Eigen::VectorXd& sigma, const PotentialSpec& pot, const TwoMicroSymbol& a,
                                  double r) {
    auto m = heisenberg_propagate(m0, t, model, sigma, pot);
    return (compact_symbol_matrix(m.space, a, sigma, r) * m.matrix).trace().real();
}

}  // namespace semiclass
