#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bts/gln.hpp"
#include "bts/likelihood.hpp"

namespace bts {

// A predictive GLN distribution is just a fully specified parameter set.
using GlnForecast = GlnParams;

// Tracked estimate pushed back into the feasible forecasting region: the
// bound component is replaced by max(recent) + delta whenever the most
// recent p observations reach it.
struct ProjectedParams {
    ParamVector theta_tilde;
    double delta = 0.001;
};

// recent[0] = x_t (most recent first), size p. The tie max(recent) == b_hat
// goes to the projection branch: the feasible set is open.
ProjectedParams project_theta(const ParamVector& theta_hat, std::span<const double> recent,
                              double delta);

// One-step-ahead density forecast GLN(mu_{t+1}, sigma2, nu, b_tilde) with
// mu_{t+1} = sum_k lambda_k gamma(recent[k-1] / b_tilde; nu).
GlnForecast predictive_distribution(const ProjectedParams& projected,
                                    std::span<const double> recent);

// Empirical distribution of all past observations, uniformly thinned to at
// most `cap` members. Returned sorted. Throws on empty history.
std::vector<double> climatology_forecast(std::span<const double> history, std::size_t cap = 5000);

// Last observation dressed with the n_err most recent one-step differences,
// members clipped into [clip_lo, clip_hi]. Returned sorted. Throws unless
// history.size() > n_err + 1.
std::vector<double> persistence_forecast(std::span<const double> history, int n_err,
                                         double clip_lo, double clip_hi);

// One issued forecast. Ensemble members can be materialized, or carried as
// a reconstruction reference into the data series ("clim:first:last:cap" or
// "persist:t:n_err:clip_lo:clip_hi", indices inclusive), which keeps
// forecast files compact and evaluation causal.
struct ForecastRecord {
    std::int64_t issue_time = 0;
    std::int64_t target_time = 0;
    enum class Kind { gln, ensemble } kind = Kind::gln;
    GlnForecast gln;
    std::string ensemble_ref;
    std::vector<double> members;  // sorted when non-empty
};

std::string make_climatology_ref(std::int64_t first, std::int64_t last, std::size_t cap);
std::string make_persistence_ref(std::int64_t t, int n_err, double clip_lo, double clip_hi);

// Rebuild the member list of an ensemble reference from the series the
// forecasts were issued on (series[i] at time index i). Throws
// std::invalid_argument for malformed or out-of-range references.
std::vector<double> reconstruct_ensemble(const std::string& ref, std::span<const double> series);

}  // namespace bts
