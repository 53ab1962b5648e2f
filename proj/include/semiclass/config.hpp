#pragma once

// TOML experiment configuration.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semiclass/hamiltonian.hpp"
#include "semiclass/lattice.hpp"
#include "semiclass/quantization.hpp"
#include "semiclass/states.hpp"
#include "semiclass/twomicro.hpp"

namespace semiclass {

struct HamiltonianSpec {
    std::string family = "quadratic";  // quadratic | power | linear | saddle2d | cubic3d
    int dim = 2;
    std::vector<RationalVector> matrix;  // quadratic; empty means the identity
    RationalVector theta;
    double alpha = 2.0;     // power
    Eigen::VectorXd omega;  // linear

    HamiltonianModel build() const;
};

// xi-dependence of one symbol term.
struct XiFactor {
    enum class Kind { One, Gaussian, Affine, Cosine };
    Kind kind = Kind::One;
    Eigen::VectorXd center;     // gaussian, affine
    Eigen::VectorXd direction;  // affine, cosine
    double width = 1.0;         // gaussian: exp(-|xi - c|^2 / width^2)

    XiFunction make(int d) const;
};

// eta-dependence of a two-microlocal term: 1 + c (v.eta / |eta|) away from
// eta = 0, smoothed to 1 on |eta| <= r0 / 4.
struct EtaFactor {
    Eigen::VectorXd direction;  // empty means 1
    double coeff = 0.0;
};

struct SymbolTerm {
    enum class Shape { Exp, Cos, Sin };
    IVec k;
    cd coeff = 1.0;
    Shape shape = Shape::Exp;
    XiFactor xi;
    EtaFactor eta;
};

struct NamedSymbol {
    std::string name;
    std::vector<SymbolTerm> terms;

    TorusSymbol torus(int d) const;
    // Throws NotInSpan when a mode is outside Lambda.
    TwoMicroSymbol two_micro(const SubmoduleBasis& lambda, double r0) const;
};

struct BoxSpec {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

struct ExperimentConfig {
    std::string command;
    std::string source;  // raw text; its hash goes into meta.json

    HamiltonianSpec hamiltonian;
    StateRecipe state;
    std::vector<double> h_list;  // strictly decreasing
    PowerLaw tau{1.0, -0.5};
    std::vector<double> betas;
    TimeWindow window;
    std::vector<double> times;
    std::vector<NamedSymbol> panel;
    std::uint64_t seed = 0;
    int threads = 0;
    int resolution = 256;

    // multiplication potential from x-only terms, times scale(h)
    std::vector<SymbolTerm> potential;
    PowerLaw potential_scale{1.0, 0.0};

    std::optional<DetectMode> detect;  // orbit-convergence resonance mode
    double ratio_min = 10.0;           // eps_h / (h tau_h) at the smallest h

    // two-microlocal geometry
    std::vector<IVec> lambda;
    Eigen::VectorXd chart_center;  // empty means the state's xi0
    double chart_radius = 1.0;
    double cutoff_r = 4.0;
    double cutoff_delta = 1.0;
    double flow_s = 0.5;
    double symbol_r0 = 1.0;  // homogeneity radius of panel two-micro symbols
    int bloch_radius = 32;
    double step = 1e-3;  // split step in rescaled time
    std::string defect = "none";  // kh-diagnostics: none | sphere | transport

    // observability
    std::vector<BoxSpec> region;
    double horizon = 1.0;
    Eigen::VectorXd chi_center;
    double chi_inner = 0.25;
    double chi_outer = 0.5;
    int draws = 64;
    std::vector<StateRecipe> adversarial;

    // spacing
    Eigen::VectorXd xi_lo;
    Eigen::VectorXd xi_hi;
    double tau_factor = 100.0;

    // counterexamples
    std::string case_name;
    IVec normal;
    double offset = 0.0;
    double neighborhood = 0.2;
    double threshold = 0.9;

    SubmoduleBasis lambda_basis() const;
    std::optional<PotentialSpec> potential_at(double h) const;
    TorusSymbol potential_symbol() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Parses a state table given as TOML text (the body of [state]).
StateRecipe parse_state_recipe(const std::string& text);

// Parses "2^-5", "1/32" or a decimal.
double parse_scale(const std::string& s);

// FNV-1a of the text, as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace semiclass
