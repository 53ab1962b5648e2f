#pragma once

// Truncated Fourier states on T^d = (R / 2 pi Z)^d and the Weyl calculus.
//
// Conventions: u(x) = (2 pi)^{-d/2} sum_k u^(k) e^{i k.x}, so that
// ||u||^2 = sum |u^(k)|^2, and a symbol is a(x, xi) = (2 pi)^{-d/2}
// sum_k a^_k(xi) e^{i k.x}.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiclass/hamiltonian.hpp"
#include "semiclass/lattice.hpp"

namespace semiclass {

using cd = std::complex<double>;
using XiFunction = std::function<cd(const Eigen::VectorXd&)>;

// Modes k with |k - center|_inf <= radius.
struct FourierGrid {
    int dim = 1;
    int radius = 1;
    double h = 1.0;
    IVec center;

    FourierGrid() = default;
    FourierGrid(int d, int n, double h_, IVec c = {});

    long long side() const { return 2LL * radius + 1; }
    long long size() const;
    bool contains(const IVec& k) const;
    long long index(const IVec& k) const;  // -1 when outside
    IVec mode(long long idx) const;
    bool operator==(const FourierGrid& o) const {
        return dim == o.dim && radius == o.radius && h == o.h && center == o.center;
    }
};

class FourierState {
public:
    FourierState() = default;
    explicit FourierState(FourierGrid g);
    FourierState(FourierGrid g, std::vector<cd> c);

    const FourierGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    double h() const { return grid_.h; }
    const std::vector<cd>& coeffs() const { return coeffs_; }
    std::vector<cd>& coeffs() { return coeffs_; }
    cd at(const IVec& k) const;
    void set(const IVec& k, cd v);

    double norm() const;
    double norm_squared() const;
    void normalize();
    // Mass in modes within `margin` of the box faces.
    double edge_mass(int margin) const;
    // Same coefficients on a larger box.
    FourierState regrid(const FourierGrid& g) const;
    double prenormalization_norm = 1.0;

private:
    FourierGrid grid_;
    std::vector<cd> coeffs_;
};

// Closed-form factor coeff * P(xi) * exp(-|xi - c|^2 / (2 w^2)) * cos(f.xi + phi).
struct XiProfile {
    cd coeff = 1.0;
    std::vector<std::pair<IVec, double>> polynomial;  // exponents -> coefficient; empty = 1
    std::optional<std::pair<Eigen::VectorXd, double>> gaussian;
    std::optional<std::pair<Eigen::VectorXd, double>> trig;
    cd operator()(const Eigen::VectorXd& xi) const;
};

struct SymbolMode {
    IVec k;
    XiFunction fhat;  // a^_k(xi), including the (2 pi)^{d/2} factor
};

class TorusSymbol {
public:
    TorusSymbol() = default;
    explicit TorusSymbol(int d) : dim_(d) {}

    int dim() const { return dim_; }
    const std::vector<SymbolMode>& modes() const { return modes_; }
    // a += coeff * g(xi) * e^{i k.x}
    TorusSymbol& add_term(const IVec& k, cd coeff, XiFunction g = {});
    // a += g(xi) cos(k.x) (or sin)
    TorusSymbol& add_cos(const IVec& k, XiFunction g = {});
    TorusSymbol& add_sin(const IVec& k, XiFunction g = {});
    TorusSymbol& add_mode(const IVec& k, XiFunction fhat);

    int max_mode() const;
    cd mode_value(const IVec& k, const Eigen::VectorXd& xi) const;
    cd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const;
    // Apply a transformation to every mode function.
    TorusSymbol map_modes(const std::function<XiFunction(const IVec&, const XiFunction&)>& f) const;

private:
    int dim_ = 1;
    std::vector<SymbolMode> modes_;
};

// Multiplication by V(t, x), a pseudodifferential Op_h(V), or a user step.
struct PotentialSpec {
    enum class Kind { None, Multiplication, Pseudodifferential, Operator };
    Kind kind = Kind::None;
    std::function<double(double, const Eigen::VectorXd&)> multiplication;
    bool time_independent = true;
    TorusSymbol symbol;
    // Applies exp(-i h dt V(t)) for the operator hook.
    std::function<FourierState(const FourierState&, double t, double dt)> step;
    double sup_bound = 0.0;

    static PotentialSpec none() { return {}; }
    static PotentialSpec from_function(std::function<double(double, const Eigen::VectorXd&)> v, double sup,
                                       bool time_independent = true);
    // Real multiplication potential from a symbol with xi-independent modes.
    static PotentialSpec from_symbol(const TorusSymbol& v);
    static PotentialSpec pseudodifferential(const TorusSymbol& v, double sup);
};

TorusSymbol plane_wave_symbol(int d, const IVec& m);

FourierState weyl_apply(const TorusSymbol& a, const FourierState& u);
// Output restricted to `out`; throws TruncationError when mass would leave it.
FourierState weyl_apply(const TorusSymbol& a, const FourierState& u, const FourierGrid& out, double tol = 0.0);
cd wigner_pairing_complex(const FourierState& u, const TorusSymbol& a);
double wigner_pairing(const FourierState& u, const TorusSymbol& a);

// Precomputed symbol samples h(k + m/2) on a fixed grid; pairing is then a
// sparse bilinear form, reused across time samples.
class PairingKernel {
public:
    PairingKernel(const FourierGrid& g, const TorusSymbol& a);
    cd pair(const std::vector<cd>& u) const;
    const FourierGrid& grid() const { return grid_; }

private:
    FourierGrid grid_;
    struct Band {
        std::vector<std::pair<long long, long long>> idx;  // (k, k + m)
        std::vector<cd> values;
    };
    std::vector<Band> bands_;
};

class FreePropagator {
public:
    FreePropagator(const FourierGrid& g, const HamiltonianModel& model);
    FourierState apply(const FourierState& u, double t) const;
    void apply_inplace(std::vector<cd>& c, double t) const;
    const std::vector<double>& energies() const { return energy_; }

private:
    FourierGrid grid_;
    std::vector<double> energy_;  // H(h k)
};

FourierState free_propagate(const FourierState& u, double t, const HamiltonianModel& model);
FourierState perturbed_propagate(const FourierState& u, double t, const HamiltonianModel& model,
                                 const PotentialSpec& v, double dt, double t0 = 0.0);

enum class WindowShape { Box, Gaussian };

struct TimeWindow {
    double t_a = 0.0;
    double t_b = 1.0;
    int samples = 256;  // M, quadrature uses M + 1 nodes
    WindowShape shape = WindowShape::Box;
    double dt = 1e-2;  // split-step size in propagation time tau * t when V is present
};

// Normalized quadrature nodes and weights on [t_a, t_b].
std::vector<std::pair<double, double>> window_weights(const TimeWindow& w);

// Calls f(t, state) at every node of the window for S_h^{tau t} u0.
void for_each_sample(const FourierState& u0, const HamiltonianModel& model, const PotentialSpec& v, double tau,
                     const TimeWindow& w, const std::function<void(double, double, const FourierState&)>& f);

double time_averaged_pairing(const FourierState& u0, const TorusSymbol& a, const HamiltonianModel& model,
                             const PotentialSpec& v, double tau, const TimeWindow& w);

// |u(x)|^2 on a uniform grid x_j = 2 pi j / res, row-major, last axis fastest.
std::vector<double> position_density(const FourierState& u, int resolution);
// Exact mass of {x : |b.x - c| < r mod 2 pi} for primitive integer b.
double slab_mass(const FourierState& u, const IVec& b, double c, double r);
// Exact integral of |u|^2 over a box prod [lo_i, hi_i].
double box_mass(const FourierState& u, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

}  // namespace semiclass
