#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "bts/forecast.hpp"
#include "bts/rng.hpp"

namespace bts {

// Continuous ranked probability score of a GLN forecast. The integral runs
// over the forecast support (0, b); observations off support add the exact
// linear correction, so the score stays finite wherever the observation
// lands.
double crps_gln(const GlnForecast& forecast, double obs);

// CRPS of an empirical ensemble via the sort-based identity
//   mean|X - obs| - 1/2 mean|X - X'|.
// Members are copied and sorted internally. Throws on an empty ensemble.
double crps_ensemble(std::span<const double> members, double obs);

// Probability integral transform. Ensembles use the randomized convention:
// fraction of members strictly below, ties broken uniformly.
double pit_gln(const GlnForecast& forecast, double obs);
double pit_ensemble(std::span<const double> sorted_members, double obs, RandomStream& rng);

// 1 - a/b, the relative improvement of score a over baseline b.
double improvement(double crps_method, double crps_baseline);

struct MarginalCurve {
    std::vector<double> grid;
    std::vector<double> avg_forecast_cdf;
    std::vector<double> empirical_cdf;
};

// Mean predictive cdf against the empirical cdf on a fixed grid. Forecast
// cdf values are supplied per (record, grid point) by the caller via
// records; observation vector must align with the records.
MarginalCurve marginal_curve(const std::vector<std::vector<double>>& forecast_cdf_rows,
                             std::span<const double> observations, std::vector<double> grid);

struct EvalReport {
    long n_scored = 0;
    double capacity = 1.0;
    double mean_crps_pct = 0.0;  // mean CRPS as percent of capacity
    double crps_sd_pct = 0.0;    // sd over scored forecasts, same units
    std::vector<long> pit_counts;
    MarginalCurve marginal;
    std::map<std::string, double> improvements_pct;  // vs named baselines
    std::vector<std::pair<std::int64_t, double>> per_time_crps;
};

// Scores an aligned batch of forecasts. `series` is the full observation
// vector (indexable by target time and by ensemble references); `rng`
// drives randomized PITs.
EvalReport evaluate_records(const std::vector<ForecastRecord>& records,
                            std::span<const double> series, double capacity, int pit_bins,
                            int marginal_points, RandomStream& rng);

}  // namespace bts
