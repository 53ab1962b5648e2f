#pragma once

// Time-window averages of quadratic observables of free evolutions.  With
// u^_k(t) = e^{-i t W_k} u^_k every such average is a sum over mode pairs
// weighted by the window transform at W_k - W_j.

#include <vector>

#include "semiclass/hamiltonian.hpp"
#include "semiclass/lattice.hpp"
#include "semiclass/quantization.hpp"

namespace semiclass {

// int w(t) e^{-i omega t} dt for the normalized continuous window: uniform on
// [t_a, t_b], or the Gaussian of width (t_b - t_a) / 10 centred in it (tails
// beyond the window are kept).
cd window_transform(const TimeWindow& w, double omega);

// W_k = scale * H(h k) over the grid, in grid order.
std::vector<double> mode_frequencies(const FourierGrid& g, const HamiltonianModel& model, double scale);

// A union of boxes or a slab {x : |b.x - c| < r mod 2 pi} with b primitive.
struct Region {
    enum class Kind { Boxes, Slab };
    Kind kind = Kind::Boxes;
    int dim = 1;
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> boxes;  // disjoint, inside [0, 2 pi)^d
    IVec normal;
    double offset = 0.0;
    double half_width = 0.0;

    static Region torus(int d);
    static Region box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static Region union_of(std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> boxes);
    static Region slab(const IVec& b, double c, double r);

    // (2 pi)^{-d} int_R e^{i m.x} dx
    cd coefficient(const IVec& m) const;
    // coefficient(k - j) vanishes unless the keys of k and j agree.
    IVec coupling_key(const IVec& k) const;
    // |R| / (2 pi)^d
    double fraction() const;
};

// Hermitian form c -> int w(t) int_R |sum_k c_k e^{-i t W_k} e_k|^2 over a
// fixed list of modes, blocked by coupling key.
class WindowedRegionForm {
public:
    WindowedRegionForm(const std::vector<IVec>& modes, const std::vector<double>& freq, const TimeWindow& w,
                       const Region& r);
    double operator()(const std::vector<cd>& c) const;
    // Columns are independent coefficient vectors.
    Eigen::VectorXd apply_columns(const Eigen::MatrixXcd& c) const;
    size_t size() const { return n_; }

private:
    size_t n_ = 0;
    std::vector<std::vector<size_t>> groups_;
    std::vector<Eigen::MatrixXcd> blocks_;
};

double windowed_region_mass(const FourierState& u, const std::vector<double>& freq, const TimeWindow& w,
                            const Region& r);

// Window average of |u(t, x)|^2 on the grid x_j = 2 pi j / res (row-major).
std::vector<double> windowed_density(const FourierState& u, const std::vector<double>& freq, const TimeWindow& w,
                                     int resolution);

// Average of |u|^2 along <Lambda>^perp, as a function of theta = B^T x on a
// res^rank grid (rank 1 or 2).
std::vector<double> lambda_averaged_density(const FourierState& u, const SubmoduleBasis& lambda, int resolution);

}  // namespace semiclass
