#ifndef ODES_SIMULATE_HPP
#define ODES_SIMULATE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "odes/covering.hpp"
#include "odes/estimators.hpp"
#include "odes/rates.hpp"

namespace odes {

struct ExperimentConfig {
    std::string truth = "separable:cos2pi";
    std::string design = "equispaced";  // or "uniform"
    std::vector<int> n_ladder;
    double sigma = 1.0;
    std::string method = "spline";  // spline | krr | nls | picard
    int beta = 0;
    std::string variant = "nonautonomous";
    double C = 1.0;
    bool cv = false;
    int R = 8;
    int T = 256;
    int replications = 1;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool trimmed_mean = false;
    int jobs = 1;

    void validate() const;
};

std::uint64_t config_hash(const ExperimentConfig& cfg);

struct RunRecord {
    int n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    std::string method;
    double mse = 0.0;
    bool failed = false;
    double wall_ms = 0.0;
};

// A builtin noiseless truth: the solution function and the upper end of the
// design interval (0.95 of the existence interval).
struct TruthSpec {
    std::function<double(double)> y;
    double x_max = 0.95;
    double y0 = 0.0;
};

TruthSpec lookup_truth(const std::string& id);

// One record per (n, replication); per-record generator keys come from
// derive_seed(config seed, n, rep), so results are independent of execution
// order and of the other cells.
std::vector<RunRecord> simulate(const ExperimentConfig& cfg);

struct RateReport {
    double slope = 0.0;
    double stderr_ = 0.0;
    double r2 = 0.0;
    int points = 0;
};

// OLS of log(mean MSE) on log(n); needs >= 3 distinct n with >= 10
// replications each. trimmed switches to the 5% trimmed mean.
RateReport rate_regression(const std::vector<RunRecord>& records, const std::string& method_filter,
                           bool trimmed = false);

void write_runs_csv(const std::vector<RunRecord>& records, const std::string& path);
std::vector<RunRecord> read_runs_csv(const std::string& path);
void write_runs_json(const std::vector<RunRecord>& records, const std::string& path);
void write_rates_json(const RateReport& report, const ExperimentConfig& cfg,
                      const std::string& path);
void write_figure_csv(const std::vector<FigureRow>& rows, const std::string& path);
void write_bound_reports_csv(const std::vector<std::pair<double, BoundReport>>& rows,
                             const std::string& path);

// Theory values for the configured (beta, sigma) at each ladder size.
void write_theory_bounds_csv(const ExperimentConfig& cfg, const std::string& path);

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace odes

#endif
