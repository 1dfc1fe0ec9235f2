#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bts/config.hpp"
#include "bts/csv.hpp"
#include "bts/evaluation.hpp"
#include "bts/optimizers.hpp"
#include "bts/synthetic.hpp"

namespace bts {

// Exit codes of the command layer.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;
inline constexpr int kExitDivergence = 4;

// Typed view of a run's options: config file keys overridden by CLI flags,
// with per-method defaults already applied.
struct RunConfig {
    std::string method = "ongd";
    std::uint64_t seed = 1;
    int replicas = 1;
    std::string out_dir = ".";
    std::string data_path;
    std::string trajectory_path;  // derived from out_dir/method when empty
    std::string forecast_path;

    // synthetic truth / simulate options
    std::int64_t length = 12000;
    std::vector<double> lambdas = {0.9};
    double sigma2 = 1.0;
    double nu = 1.5;
    BoundCurve bound = BoundCurve::sinusoid(1.0, 0.25, 6000.0);

    // model + schedule
    int p = 1;
    double alpha = 0.975;
    double eta = 0.001;
    int iterations = 10000;
    int m = 100;
    int batch_length = 1000;
    int update_every = 500;
    std::int64_t warmup = 1000;
    double fixed_bound = 1.0;  // rmle_1
    std::vector<double> init_lambda;  // defaults to zeros of size p
    double init_sigma2 = 1.0;
    double init_nu = 1.0;
    double init_b = 1.0;

    // data handling
    double delta = 0.001;
    double capacity = 1.0;
    bool coarsen_upper = true;

    // forecasting / evaluation
    std::int64_t forecast_start = 2000;
    int n_err = 100;
    std::int64_t clim_cap = 5000;
    int pit_bins = 20;
    int marginal_points = 101;
    std::map<std::string, std::string> baselines;  // name -> report path

    // backtest
    std::int64_t val_start = -1;
    std::int64_t val_end = -1;
    std::int64_t test_end = -1;
    std::vector<std::int64_t> grid_m;
    std::vector<double> grid_eta;
    std::vector<double> grid_alpha;

    static RunConfig load(const KeyValueConfig& kv, const std::string& command);

    ParamVector initial_theta() const;
    NgdConfig ngd_config() const;
    double clip_hi() const;  // upper coarsening/clipping bound in natural units
};

bool is_gln_method(const std::string& method);
bool is_benchmark_method(const std::string& method);

// --- library-level pipeline stages (file-free) ---

// delta-coarsening applied at ingestion; upper side only when configured.
std::vector<double> coarsen_series(std::vector<double> x, const RunConfig& cfg);

struct TrackResult {
    std::vector<TrajectoryRecord> records;
    bool diverged = false;
    std::int64_t diverged_at = -1;
};

// Runs the configured method over the series with the published schedule:
// NGD refits every update_every steps after `warmup` on the trailing
// batch_length points (warm-started); rMLE warm-starts with an NGD fit on
// the first `warmup` points and then steps every observation; ONGD starts
// as soon as a full minibatch is available.
TrackResult track_series(std::span<const double> x, const RunConfig& cfg);

// One-step-ahead forecasts issued from `forecast_start` on. GLN methods
// consume the tracked trajectory; ideal needs the truth columns; the
// benchmarks need only the series itself.
std::vector<ForecastRecord> forecast_series(const SeriesData& data, std::span<const double> x,
                                            const std::vector<TrajectoryRecord>& trajectory,
                                            const RunConfig& cfg);

EvalReport evaluate_series(const std::vector<ForecastRecord>& records, std::span<const double> x,
                           const RunConfig& cfg);

struct BacktestCell {
    int m = 0;
    double eta = 0.0;
    double alpha = 0.0;
    double val_crps_pct = 0.0;
    bool diverged = false;
};

struct BacktestResult {
    std::vector<BacktestCell> cells;
    BacktestCell winner;
    double validation_crps_pct = 0.0;
    double test_crps_pct = 0.0;
    EvalReport test_report;
};

BacktestResult backtest_series(const SeriesData& data, const RunConfig& cfg);

// --- commands (file-based); return exit codes and print errors to stderr ---

int cmd_simulate(const RunConfig& cfg);
int cmd_track(const RunConfig& cfg);
int cmd_forecast(const RunConfig& cfg);
int cmd_evaluate(const RunConfig& cfg);
int cmd_backtest(const RunConfig& cfg);

void write_report(const std::string& path, const EvalReport& report, const std::string& method);
double read_report_crps(const std::string& path);

}  // namespace bts
