#pragma once

// JSON and CSV forms of lattices, states, K_h fields and density operators.

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "semiclass/lattice.hpp"
#include "semiclass/limit.hpp"
#include "semiclass/quantization.hpp"
#include "semiclass/twomicro.hpp"

namespace semiclass {

using nlohmann::json;

json rational_json(const RationalVector& v);  // ["p/q", ...]
RationalVector rational_from_json(const json& j);

json to_json(const SubmoduleBasis& b);  // {dim, rank, hnf}
SubmoduleBasis submodule_from_json(const json& j);

// {dim, N, h, center, coeffs: [[k, re, im], ...]} with zero coefficients omitted.
json to_json(const FourierState& u);
FourierState state_from_json(const json& j);

// {lambda_hnf, h, fibers: [{coset_rep, sigma, omega, modes: [[k, re, im], ...]}]}
json to_json(const KhField& f);

// {lambda_hnf, omega, window_radius, matrix: row-major [re, im]}
json to_json(const BlochDensityOperator& m);
BlochDensityOperator density_operator_from_json(const json& j);

// CSV with columns x1..xd,value on the grid x_j = 2 pi j / res.
void write_density_csv(const std::string& path, const std::vector<double>& values, int dim, int resolution);

}  // namespace semiclass
