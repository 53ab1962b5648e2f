#pragma once

// Config-driven h-sweeps.  Each command returns a SweepReport with one row
// per (h, metric); write_report lays it out as report.csv, meta.json and
// optional density grids.

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "semiclass/config.hpp"

namespace semiclass {

struct ReportRow {
    std::string command;
    double h = 0.0;
    double tau = 0.0;
    std::string metric;
    double value = 0.0;
};

// |u|^2 on the res^dim grid, written as density_<h>_<t>.csv.
struct DensityGrid {
    double h = 0.0;
    double t = 0.0;
    int dim = 2;
    int resolution = 256;
    std::vector<double> values;
};

struct SweepReport {
    std::string command;
    std::vector<ReportRow> rows;
    nlohmann::json meta;
    std::vector<DensityGrid> densities;

    void add(double h, double tau, const std::string& metric, double value);
    // Value of `metric` at h (exact match); nullopt when absent.
    std::optional<double> find(const std::string& metric, double h) const;
    double get(const std::string& metric, double h) const;  // throws ShapeError when absent
    std::string csv() const;
};

// Writes <dir>/report.csv, <dir>/meta.json and the density grids; each file is
// written to a temporary name and renamed.
void write_report(const SweepReport& r, const std::string& dir);

// Metric names with a parameter, e.g. tagged("kappa", "beta", 0.5) = "kappa[beta=0.5]".
std::string tagged(const std::string& metric, const std::string& key, double v);

SweepReport cmd_orbit_convergence(const ExperimentConfig& c);
SweepReport cmd_dirac_drift(const ExperimentConfig& c);
SweepReport cmd_threshold_sweep(const ExperimentConfig& c);
SweepReport cmd_limit_compare(const ExperimentConfig& c);
SweepReport cmd_observability(const ExperimentConfig& c);
SweepReport cmd_spacing(const ExperimentConfig& c);
SweepReport cmd_counterexamples(const ExperimentConfig& c);
SweepReport cmd_kh_diagnostics(const ExperimentConfig& c);

const std::vector<std::string>& command_names();
// Dispatches on `command` (or c.command when empty).
SweepReport run_command(const ExperimentConfig& c, const std::string& command = "");

// Least-squares slope of log(value) against log(h) over rows of `metric`
// with positive values.
double loglog_slope(const SweepReport& r, const std::string& metric);

// tau_h^H = h / (minimal gap between distinct values of H(h k)) over the
// modes with h k in the open box (lo, hi).  Throws EmptyCluster with fewer than
// two distinct energies.
struct SpacingResult {
    double tau_h = 0.0;
    double min_gap = 0.0;
    long long distinct = 0;
};
SpacingResult minimal_spacing(const HamiltonianModel& model, double h, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi, double rel_tol = 1e-12);

}  // namespace semiclass
