#pragma once

// Exact arithmetic for primitive submodules of Z^d (d <= 4).

#include <gmpxx.h>

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace semiclass {

using IntVector = std::vector<mpz_class>;
using RationalVector = std::vector<mpq_class>;
using IVec = std::vector<long long>;

constexpr int kMaxDim = 4;

IntVector to_int_vector(const IVec& v);
IVec to_ivec(const IntVector& v);
RationalVector to_rational_vector(const Eigen::VectorXd& v);  // exact binary value
Eigen::VectorXd to_eigen(const RationalVector& v);
Eigen::VectorXd to_eigen(const IntVector& v);
Eigen::VectorXd to_eigen(const IVec& v);
std::string to_string(const mpq_class& q);  // "p/q" or "p"
// Quotient of the converted parts; correctly rounded while both fit in 53 bits.
double to_double(const mpq_class& q);
mpq_class parse_rational(const std::string& s);

// Primitive submodule stored by its basis in Hermite normal form.  Basis
// vector i has its first nonzero entry (positive) at pivot(i); pivots strictly
// increase and entries of earlier vectors at later pivots are reduced to
// [0, pivot).
class SubmoduleBasis {
public:
    SubmoduleBasis() = default;
    static SubmoduleBasis zero(int dim);
    static SubmoduleBasis full(int dim);
    // Wraps an already saturated and independent family; canonicalizes to HNF.
    static SubmoduleBasis from_primitive(int dim, const std::vector<IntVector>& columns);

    int dim() const { return dim_; }
    int rank() const { return static_cast<int>(hnf_.size()); }
    const std::vector<IntVector>& hnf() const { return hnf_; }
    const std::vector<int>& pivots() const { return pivots_; }

    std::optional<IntVector> coordinates(const IntVector& k) const;
    bool contains(const IntVector& k) const { return coordinates(k).has_value(); }
    bool contains(const IVec& k) const { return contains(to_int_vector(k)); }
    // Canonical representative of k + Lambda.
    IntVector reduce(const IntVector& k) const;
    IVec reduce(const IVec& k) const;

    Eigen::MatrixXd basis_matrix() const;  // d x rank, columns = hnf vectors
    // Integer matrix W (d x rank) with W^T B = I; the columns span the
    // auxiliary lattice used for projections onto <Lambda>.
    Eigen::MatrixXd dual_matrix() const { return dual_; }

    bool operator==(const SubmoduleBasis& o) const { return dim_ == o.dim_ && hnf_ == o.hnf_; }
    bool operator!=(const SubmoduleBasis& o) const { return !(*this == o); }

private:
    void finalize();
    int dim_ = 0;
    std::vector<IntVector> hnf_;
    std::vector<int> pivots_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd dual_;
};

struct FundamentalDomainSpec {
    SubmoduleBasis lattice;
    double scale = 1.0;  // 2*pi for the auxiliary lattice
    // Box [0,1)^rank in coordinates relative to scale * hnf columns.
};

struct ComplementData {
    std::vector<RationalVector> orth_basis;  // basis of Lambda^perp
    Eigen::MatrixXd aux_lattice;             // d x rank, columns of Lambda~ (already times 2*pi)
    FundamentalDomainSpec domain;            // D_Lambda
    FundamentalDomainSpec aux_domain;        // D_Lambda~
};

// Row Hermite normal form of an integer matrix (rows are vectors); zero rows
// dropped.
std::vector<IntVector> hermite_rows(std::vector<IntVector> rows, std::vector<int>* pivots = nullptr);
// Basis of {x in Z^d : r . x = 0 for every row r}.
std::vector<IntVector> integer_kernel(const std::vector<IntVector>& rows, int dim);

SubmoduleBasis saturate(const std::vector<IntVector>& columns, int dim);
SubmoduleBasis annihilator_lattice(const RationalVector& v);

struct DetectMode {
    int qmax = 50;
    double tol = 1e-9;
};

struct Resonance {
    SubmoduleBasis lattice;
    int order = 0;  // d - rank
};

Resonance resonance_classify(const RationalVector& gradient);
Resonance resonance_classify(const Eigen::VectorXd& gradient, const DetectMode& mode);

ComplementData complement_data(const SubmoduleBasis& lambda);

// Coordinates c of eta = B c, reduced into [0,1)^rank.
Eigen::VectorXd fractional_coordinates(const Eigen::VectorXd& eta, const SubmoduleBasis& lambda);
Eigen::VectorXd fractional_reduce(const Eigen::VectorXd& eta, const SubmoduleBasis& lambda);

}  // namespace semiclass
