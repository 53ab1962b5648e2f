#pragma once

// Second microlocalization along a primitive submodule Lambda: the chart
// xi = sigma(xi) + eta(xi), symbols a(x, xi, eta), the K_h regrouping into
// Bloch fibers and fiberwise pairings.

#include <functional>
#include <map>
#include <optional>

#include "semiclass/hamiltonian.hpp"
#include "semiclass/lattice.hpp"
#include "semiclass/quantization.hpp"

namespace semiclass {

// The fixed cutoff on <Lambda>: 1 for |eta| <= 1/2, 0 for |eta| >= 1.
double chi_bump(double r);

struct ChartPoint {
    Eigen::VectorXd sigma;  // on I_Lambda
    Eigen::VectorXd eta;    // in <Lambda>
};

class ChartF {
public:
    // Valid on B(xi0, radius / 2).  Throws PreconditionFailed when dH(xi0) is
    // not orthogonal to Lambda or d2H is not definite on B(xi0, radius).
    ChartF(HamiltonianModel model, Eigen::VectorXd xi0, SubmoduleBasis lambda, double radius);

    ChartPoint decompose(const Eigen::VectorXd& xi) const;
    // Newton path regardless of the family (for cross-validation).
    ChartPoint decompose_newton(const Eigen::VectorXd& xi) const;
    bool closed_form() const { return model_.is_quadratic(); }
    bool in_domain(const Eigen::VectorXd& xi) const;

    // Bloch phase omega_h(sigma) = {sigma_Lambda / h} as a point of <Lambda>,
    // and its coordinates in [0, 1)^rank.
    Eigen::VectorXd bloch_phase(const Eigen::VectorXd& sigma, double h) const;
    Eigen::VectorXd bloch_coordinates(const Eigen::VectorXd& sigma, double h) const;

    const HamiltonianModel& model() const { return model_; }
    const Eigen::VectorXd& xi0() const { return xi0_; }
    const SubmoduleBasis& lambda() const { return lambda_; }
    double radius() const { return radius_; }

private:
    void check_domain(const Eigen::VectorXd& xi) const;
    HamiltonianModel model_;
    Eigen::VectorXd xi0_;
    SubmoduleBasis lambda_;
    double radius_;
    Eigen::MatrixXd basis_;  // d x r
    Eigen::MatrixXd dual_;   // W with W^T B = I
};

using EtaFunction = std::function<cd(const Eigen::VectorXd& xi, const Eigen::VectorXd& eta)>;

struct TwoMicroMode {
    IVec k;
    XiFunction weight;  // compactly supported xi factor, includes (2 pi)^{d/2}
    EtaFunction core;   // empty means 1
    EtaFunction hom;    // on the unit sphere of <Lambda>; empty means 1
};

// a(x, xi, eta) = (2 pi)^{-d/2} sum_k weight_k(xi) core_k(xi, eta) e^{i k.x},
// with core_k(xi, eta) = hom_k(xi, eta / |eta|) for |eta| > r0.
class TwoMicroSymbol {
public:
    TwoMicroSymbol() = default;
    TwoMicroSymbol(SubmoduleBasis lambda, double r0);

    // Throws NotInSpan when k is not in Lambda.
    TwoMicroSymbol& add_term(const IVec& k, cd coeff, XiFunction g, EtaFunction core = {}, EtaFunction hom = {});
    TwoMicroSymbol& add_mode(TwoMicroMode m);

    const SubmoduleBasis& lambda() const { return lambda_; }
    int dim() const { return lambda_.dim(); }
    double r0() const { return r0_; }
    const std::vector<TwoMicroMode>& modes() const { return modes_; }

    cd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const Eigen::VectorXd& eta) const;
    cd evaluate_hom(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, const Eigen::VectorXd& omega) const;
    // Largest |core - hom| over the given sample points with |eta| > r0.
    double matching_defect(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& xi_eta) const;

private:
    SubmoduleBasis lambda_;
    double r0_ = 1.0;
    std::vector<TwoMicroMode> modes_;
};

enum class TwoMicroPart { Outer, Sphere, Compact, Full };

// The ordinary symbol a_i(x, xi, tau eta(xi)) for the chosen piece of
// a = a1 + a2 + a3 (outer, sphere, compact).
TorusSymbol substituted_symbol(const TwoMicroSymbol& a, const ChartF& chart, double tau, double r, double delta,
                               TwoMicroPart part);

struct TwoMicroPairing {
    double compact_part = 0.0;
    double sphere_part = 0.0;
    double outer_part = 0.0;
    double total() const { return compact_part + sphere_part + outer_part; }
};

TwoMicroPairing two_micro_pairing(const FourierState& u, const TwoMicroSymbol& a, const ChartF& chart, double tau,
                                  double r, double delta);

// Radial window equal to 1 on B(center, inner) and 0 outside B(center, outer)
// (quintic smoothstep in between).
struct MWindow {
    Eigen::VectorXd center;
    double inner = 0.0;
    double outer = 0.0;
    double operator()(const Eigen::VectorXd& xi) const;
    // 1 on B(xi0, radius / 4), supported in the chart domain B(xi0, radius / 2).
    static MWindow for_chart(const ChartF& chart);
};

struct KhFiber {
    IVec coset_rep;                // canonical representative of k + Lambda
    Eigen::VectorXd sigma;         // sigma(h k) for any k in the coset
    Eigen::VectorXd omega;         // omega_h(sigma) in <Lambda>
    std::vector<IVec> modes;       // grid modes k in the coset
    std::vector<IVec> labels;      // lambda = k - sigma/h + omega, a point of Lambda
    std::vector<cd> amplitudes;    // m(sigma) u^(k)
};

struct KhField {
    SubmoduleBasis lambda;
    double h = 1.0;
    FourierGrid grid;
    std::vector<KhFiber> fibers;

    // K_h u(sigma, y) = (2 pi)^{-d/2} sum_k amp_k e^{i (k - sigma/h).y}.
    cd evaluate(size_t fiber, const Eigen::VectorXd& y) const;
    double mass() const;  // sum over fibers of int_{T^d} |K_h u|^2
    // Inverse regrouping: the windowed coefficients m(sigma(hk)) u^(k).
    FourierState rebuild() const;
    // Index of the fiber carrying the largest mass.
    size_t dominant_fiber() const;
};

KhField kh_transform(const FourierState& u, const ChartF& chart, const MWindow& m);

struct BlochFiberInfo {
    Eigen::VectorXd omega;
    Eigen::VectorXd sigma;
    double h = 1.0;
    const std::vector<IVec>* labels = nullptr;
};

// s-independent observable Q(omega, sigma) given as a matrix on the fiber
// labels.
struct BlochObservable {
    std::function<Eigen::MatrixXcd(const BlochFiberInfo&)> matrix;

    static BlochObservable identity();
    // Entry (l, l') is (2 pi)^{-d/2} a^_{l - l'}(sigma + h ((l + l')/2 - omega)); with
    // at_limit the symbol is frozen at sigma.
    static BlochObservable from_symbol(const TorusSymbol& a, bool at_limit = false);
    // Projector onto the fiber mode with label `label` in the fiber whose
    // coset representative is `coset`.
    static BlochObservable mode_projector(const SubmoduleBasis& lambda, const IVec& coset, const IVec& label);
};

cd rho_pairing(const KhField& field, const BlochObservable& q);
cd rho_pairing(const FourierState& u, const BlochObservable& q, const ChartF& chart, const MWindow& m);

// Classical flows acting on symbols.
TorusSymbol pullback_phi(const TorusSymbol& a, const HamiltonianModel& model, double s);
TwoMicroSymbol pullback_phi0(const TwoMicroSymbol& a, const HamiltonianModel& model, double s);
TwoMicroSymbol pullback_phi1(const TwoMicroSymbol& a, const ChartF& chart, double s);
TwoMicroSymbol pullback_phi1_tilde(const TwoMicroSymbol& a, const ChartF& chart, double t);

}  // namespace semiclass
