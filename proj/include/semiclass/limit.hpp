#pragma once

// Limit objects: Lambda-averaged symbols, uniform orbit measures, and the
// Schroedinger/Heisenberg flows on the Bloch space L^2_omega(R^d, Lambda).

#include <map>
#include <optional>

#include "semiclass/hamiltonian.hpp"
#include "semiclass/lattice.hpp"
#include "semiclass/quantization.hpp"
#include "semiclass/twomicro.hpp"

namespace semiclass {

// Keeps the x-modes of a that lie in Lambda.
TorusSymbol averaged_symbol(const TorusSymbol& a, const SubmoduleBasis& lambda);

struct OrbitMeasureSpec {
    Eigen::VectorXd x0;
    Eigen::VectorXd xi0;
    SubmoduleBasis lambda0;

    // lambda0 from the resonances of dH(xi0), exact when the model supplies a
    // rational gradient and `mode` is empty.
    static OrbitMeasureSpec make(const HamiltonianModel& model, Eigen::VectorXd x0, Eigen::VectorXd xi0,
                                 std::optional<DetectMode> mode = {});
};

double orbit_measure_pairing(const OrbitMeasureSpec& spec, const TorusSymbol& a);

// Modes lambda - omega for lambda = B c, |c|_inf <= radius.
class BlochSpace {
public:
    BlochSpace(SubmoduleBasis lambda, Eigen::VectorXd omega, int radius = 32);

    const SubmoduleBasis& lambda() const { return lambda_; }
    const Eigen::VectorXd& omega() const { return omega_; }
    int radius() const { return radius_; }
    long long dim() const { return static_cast<long long>(labels_.size()); }
    const std::vector<IVec>& labels() const { return labels_; }  // lambda in Z^d
    long long index(const IVec& label) const;                     // -1 when outside
    Eigen::VectorXd mode(long long i) const;                      // lambda - omega
    // Entries on the outermost shell of the window.
    std::vector<long long> edge() const;

private:
    SubmoduleBasis lambda_;
    Eigen::VectorXd omega_;
    int radius_;
    std::vector<IVec> labels_;
    std::vector<IVec> coords_;
    std::map<IVec, long long> index_;
};

struct BlochDensityOperator {
    BlochSpace space;
    Eigen::MatrixXcd matrix;

    // Throws PreconditionFailed unless Hermitian, positive and of unit trace.
    void validate(double tol = 1e-10) const;
    static BlochDensityOperator pure(const BlochSpace& space, const Eigen::VectorXcd& v);
    // Normalized projector on the data of one K_h fiber.
    static BlochDensityOperator from_fiber(const KhFiber& fiber, const SubmoduleBasis& lambda, int radius = 32);
};

// Generator 1/2 d2H(sigma)(l - w).(l - w) + <V>_Lambda(., sigma) on the window.
class LimitGenerator {
public:
    LimitGenerator(const BlochSpace& space, const HamiltonianModel& model, const Eigen::VectorXd& sigma,
                   const PotentialSpec& v = PotentialSpec::none());
    const Eigen::MatrixXcd& matrix() const { return g_; }
    Eigen::MatrixXcd evolution(double t) const;

private:
    Eigen::MatrixXcd g_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXcd evecs_;
};

// Matrix of multiplication by <a>_Lambda(., sigma) on the window.
Eigen::MatrixXcd multiplication_matrix(const BlochSpace& space, const TorusSymbol& a, const Eigen::VectorXd& sigma);

Eigen::VectorXcd bloch_propagate(const Eigen::VectorXcd& v, double t, const BlochSpace& space,
                                 const HamiltonianModel& model, const Eigen::VectorXd& sigma,
                                 const PotentialSpec& pot = PotentialSpec::none());

BlochDensityOperator heisenberg_propagate(const BlochDensityOperator& m0, double t, const HamiltonianModel& model,
                                          const Eigen::VectorXd& sigma, const PotentialSpec& pot = PotentialSpec::none());

double heisenberg_trace_pairing(const BlochDensityOperator& m0, double t, const HamiltonianModel& model,
                                const Eigen::VectorXd& sigma, const PotentialSpec& pot, const TorusSymbol& a);

// Operator a_sigma of the compact piece: entry (l, l') is
// (2 pi)^{-d/2} a^_{l - l'}(sigma, eta) chi(|eta| / r) at eta = (l + l')/2 - omega.
Eigen::MatrixXcd compact_symbol_matrix(const BlochSpace& space, const TwoMicroSymbol& a, const Eigen::VectorXd& sigma,
                                       double r);

// Re Tr(a_sigma M(t)) with a_sigma from compact_symbol_matrix.
double heisenberg_compact_pairing(const BlochDensityOperator& m0, double t, const HamiltonianModel& model,
                                  const Eigen::VectorXd& sigma, const PotentialSpec& pot, const TwoMicroSymbol& a,
                                  double r);

}  // namespace semiclass
