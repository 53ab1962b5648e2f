#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semiclass/hamiltonian.hpp"
#include "semiclass/quantization.hpp"

namespace semiclass {

// coeff * h^exponent; parsed from "h^0.5", "10*h^0.25", "0.3" or "1/h".
struct PowerLaw {
    double coeff = 1.0;
    double exponent = 0.0;
    double at(double h) const;
    static PowerLaw parse(const std::string& s);
    std::string str() const;
};

struct ProfileSpec {
    enum class Kind { Gaussian, CompactBump };
    Kind kind = Kind::Gaussian;
    // Per-axis widths of the position profile; empty means all ones.
    std::vector<double> scales;

    // Unitary Fourier transform of the L^2-normalized profile.
    double fourier(const Eigen::VectorXd& zeta) const;
    // Factor of `fourier` along axis i.
    double fourier_axis(int i, double zeta) const;
    // Smallest Z such that the mass of |rho^|^2 outside |zeta_i| <= Z / scale_i is negligible.
    double momentum_cutoff() const;
    double scale(int i) const { return scales.empty() ? 1.0 : scales[i]; }
};

struct CoherentParams {
    Eigen::VectorXd x0;
    Eigen::VectorXd xi0;
    double eps = 1.0;
    ProfileSpec profile;
    int padding = 0;  // extra grid shells beyond the tail rule
};

// u^(k) = eps^{d/2} rho^(eps (k - xi0/h)) e^{-i (k - xi0/h).x0}, renormalized.
// When `grid` is given it is used as is and TruncationError reports tails
// reaching its boundary.
FourierState coherent_state(const CoherentParams& p, double h, const std::optional<FourierGrid>& grid = {});
// Same with xi0 replaced by xi0 + eta0 / tau.
FourierState modulated_coherent_state(CoherentParams p, const Eigen::VectorXd& eta0, double tau, double h,
                                      const std::optional<FourierGrid>& grid = {});

FourierState plane_wave(const FourierGrid& grid, const IVec& k);

// Smooth cutoff equal to 1 on |t| <= inner and 0 on |t| >= outer.
double smooth_cutoff(double t, double inner, double outer);

struct SpecialParams {
    double eps_exponent = 0.5;  // example3, wunsch: scale h^eps_exponent
    double alpha = 1.0;         // example3 frequency along x1
    // power_quasimode: H = |xi|^k near xi0 = 0, tau = h^{-tau_exponent},
    // eps = eps_coeff * (tau h^{k-1})^{1/k}
    double k = 4.0;
    double tau_exponent = 2.0;
    double eps_coeff = 10.0;
    int dim = 1;
    Eigen::VectorXd x0;
    ProfileSpec profile;
    // wunsch cutoff chi(x2): 1 on |x2| <= inner, 0 beyond outer
    double chi_inner = 2.0;
    double chi_outer = 3.0;
};

// kind: lagrangian_diag | example3 | wunsch | power_quasimode
FourierState special_state(const std::string& kind, const SpecialParams& p, double h);

// The Wunsch perturbation W(x2) = 2 (1 - cos x2), equal to x2^2 to fourth order.
double wunsch_potential(const Eigen::VectorXd& x);

// Uniform (or supplied) superposition of the grid modes with |H(hk) - E| < tol.
FourierState eigenfunction_cluster(double energy, const FourierGrid& grid, const HamiltonianModel& model,
                                   const std::map<IVec, cd>& coeffs = {}, double rel_tol = 1e-12);

// Mass of modes with |h k|^2 >= R.
double tail_mass(const FourierState& u, double r);

struct StateRecipe {
    enum class Family { Coherent, Modulated, PlaneWave, LagrangianDiag, Example3, Wunsch, PowerQuasimode, Cluster };
    Family family = Family::Coherent;
    int dim = 2;
    Eigen::VectorXd x0;
    Eigen::VectorXd xi0;
    Eigen::VectorXd eta0;
    PowerLaw eps{1.0, 0.5};
    PowerLaw tau{1.0, 0.0};
    ProfileSpec profile;
    SpecialParams special;
    double energy = 1.0;  // cluster
    int grid_radius = 0;  // cluster and plane wave grids
    int padding = 0;

    FourierState build(double h, const HamiltonianModel* model = nullptr) const;
    static Family parse_family(const std::string& s);
};

struct OscillationRow {
    double h;
    double r;
    double tail;
};

std::vector<OscillationRow> oscillation_profile(const StateRecipe& recipe, const std::vector<double>& h_list,
                                                const std::vector<double>& r_list,
                                                const HamiltonianModel* model = nullptr);

}  // namespace semiclass
