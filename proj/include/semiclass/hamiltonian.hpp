#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semiclass/lattice.hpp"

namespace semiclass {

enum class Family { Quadratic, Power, Linear, Saddle2d, Cubic3d, Shifted };

struct HamiltonianEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

class HamiltonianModel {
public:
    // H(xi) = 1/2 A (xi + theta) . (xi + theta)
    static HamiltonianModel quadratic(std::vector<RationalVector> a, RationalVector theta);
    static HamiltonianModel quadratic(const Eigen::MatrixXd& a);
    static HamiltonianModel power(double alpha, int dim);
    static HamiltonianModel linear(const Eigen::VectorXd& omega);
    static HamiltonianModel saddle2d();
    static HamiltonianModel cubic3d();
    // H_h(xi) = H(xi + h omega); the caller passes offset = h * omega.
    static HamiltonianModel shifted(const HamiltonianModel& base, const Eigen::VectorXd& offset);

    Family family() const { return family_; }
    int dim() const { return dim_; }
    std::string name() const;
    bool is_quadratic() const;

    double value(const Eigen::VectorXd& xi) const;
    HamiltonianEval evaluate(const Eigen::VectorXd& xi) const;
    // Exact gradient for rational input where the family allows it.
    std::optional<RationalVector> exact_gradient(const RationalVector& xi) const;

    // Quadratic data (valid when is_quadratic()).
    const Eigen::MatrixXd& a_matrix() const { return a_; }
    const Eigen::VectorXd& theta() const { return theta_; }
    double alpha() const { return alpha_; }

private:
    Family family_ = Family::Quadratic;
    int dim_ = 0;
    std::vector<RationalVector> a_exact_;
    RationalVector theta_exact_;
    Eigen::MatrixXd a_;
    Eigen::VectorXd theta_;
    double alpha_ = 2.0;
    Eigen::VectorXd omega_;
    std::shared_ptr<const HamiltonianModel> base_;
    Eigen::VectorXd offset_;
};

struct PointClass {
    bool in_critical_set = false;  // Hessian not definite
    bool isoenergetic_nondegenerate = false;
};

PointClass classify_point(const HamiltonianModel& model, const Eigen::VectorXd& xi, double tol = 1e-10);

struct ChainLink {
    SubmoduleBasis lattice;
    Eigen::VectorXd eta;
};

bool check_assumption_A(const HamiltonianModel& model, const Eigen::VectorXd& xi,
                        const std::vector<ChainLink>& chain, double tol = 1e-9);

}  // namespace semiclass
