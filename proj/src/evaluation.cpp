#include "bts/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace bts {

namespace {

// Adaptive Simpson with absolute tolerance; the CRPS integrands are smooth
// on each side of the observation kink, which callers split at.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

constexpr double kCrpsTol = 1e-7;

}  // namespace

double crps_gln(const GlnForecast& forecast, double obs) {
    forecast.validate();
    const double b = forecast.b;
    const auto f2 = [&](double y) {
        const double F = gln_cdf(y, forecast);
        return F * F;
    };
    const auto g2 = [&](double y) {
        const double G = 1.0 - gln_cdf(y, forecast);
        return G * G;
    };

    if (obs >= b) {
        return adaptive_simpson(f2, 0.0, b, kCrpsTol) + (obs - b);
    }
    if (obs <= 0.0) {
        return adaptive_simpson(g2, 0.0, b, kCrpsTol) - obs;
    }
    return adaptive_simpson(f2, 0.0, obs, 0.5 * kCrpsTol) +
           adaptive_simpson(g2, obs, b, 0.5 * kCrpsTol);
}

double crps_ensemble(std::span<const double> members, double obs) {
    const std::size_t n = members.size();
    if (n == 0) throw std::invalid_argument("crps_ensemble: empty ensemble");
    std::vector<double> x(members.begin(), members.end());
    std::sort(x.begin(), x.end());

    double abs_term = 0.0;
    double pair_term = 0.0;  // sum (2i - n + 1) x_i = 1/2 sum_{ij} |x_i - x_j|
    for (std::size_t i = 0; i < n; ++i) {
        abs_term += std::abs(x[i] - obs);
        pair_term += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * x[i];
    }
    const double dn = static_cast<double>(n);
    return abs_term / dn - pair_term / (dn * dn);
}

double pit_gln(const GlnForecast& forecast, double obs) {
    return gln_cdf(obs, forecast);
}

double pit_ensemble(std::span<const double> sorted_members, double obs, RandomStream& rng) {
    const std::size_t n = sorted_members.size();
    if (n == 0) throw std::invalid_argument("pit_ensemble: empty ensemble");
    const auto lo = std::lower_bound(sorted_members.begin(), sorted_members.end(), obs);
    const auto hi = std::upper_bound(lo, sorted_members.end(), obs);
    const double n_less = static_cast<double>(lo - sorted_members.begin());
    const double n_eq = static_cast<double>(hi - lo);
    double pit = n_less;
    if (n_eq > 0.0) pit += rng.uniform01() * n_eq;
    return pit / static_cast<double>(n);
}

double improvement(double crps_method, double crps_baseline) {
    if (crps_baseline == 0.0) throw std::invalid_argument("improvement: zero baseline");
    return 1.0 - crps_method / crps_baseline;
}

MarginalCurve marginal_curve(const std::vector<std::vector<double>>& forecast_cdf_rows,
                             std::span<const double> observations, std::vector<double> grid) {
    if (forecast_cdf_rows.size() != observations.size()) {
        throw std::invalid_argument("marginal_curve: forecasts/observations length mismatch");
    }
    MarginalCurve curve;
    curve.grid = std::move(grid);
    curve.avg_forecast_cdf.assign(curve.grid.size(), 0.0);
    curve.empirical_cdf.assign(curve.grid.size(), 0.0);
    if (observations.empty()) return curve;

    for (std::size_t r = 0; r < forecast_cdf_rows.size(); ++r) {
        if (forecast_cdf_rows[r].size() != curve.grid.size()) {
            throw std::invalid_argument("marginal_curve: cdf row/grid length mismatch");
        }
        for (std::size_t g = 0; g < curve.grid.size(); ++g) {
            curve.avg_forecast_cdf[g] += forecast_cdf_rows[r][g];
            curve.empirical_cdf[g] += observations[r] <= curve.grid[g] ? 1.0 : 0.0;
        }
    }
    const double n = static_cast<double>(observations.size());
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        curve.avg_forecast_cdf[g] /= n;
        curve.empirical_cdf[g] /= n;
    }
    return curve;
}

EvalReport evaluate_records(const std::vector<ForecastRecord>& records,
                            std::span<const double> series, double capacity, int pit_bins,
                            int marginal_points, RandomStream& rng) {
    if (records.empty()) throw std::invalid_argument("evaluate_records: nothing to score");
    if (!(capacity > 0.0)) throw std::invalid_argument("evaluate_records: capacity must be > 0");
    if (pit_bins < 1 || marginal_points < 2) {
        throw std::invalid_argument("evaluate_records: bad pit_bins/marginal_points");
    }

    EvalReport report;
    report.capacity = capacity;
    report.pit_counts.assign(pit_bins, 0);

    std::vector<double> observations;
    std::vector<std::vector<double>> member_lists(records.size());
    double grid_hi = capacity;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (rec.target_time < 0 || rec.target_time >= static_cast<std::int64_t>(series.size())) {
            throw std::invalid_argument("evaluate_records: target time outside the series");
        }
        const double obs = series[rec.target_time];
        observations.push_back(obs);
        grid_hi = std::max(grid_hi, obs);
        if (rec.kind == ForecastRecord::Kind::gln) {
            grid_hi = std::max(grid_hi, rec.gln.b);
        } else {
            member_lists[i] =
                rec.members.empty() ? reconstruct_ensemble(rec.ensemble_ref, series) : rec.members;
            if (!std::is_sorted(member_lists[i].begin(), member_lists[i].end())) {
                std::sort(member_lists[i].begin(), member_lists[i].end());
            }
            grid_hi = std::max(grid_hi, member_lists[i].back());
        }
    }

    double sum = 0.0;
    double sum_sq = 0.0;
    std::vector<std::vector<double>> cdf_rows(records.size());
    std::vector<double> grid(marginal_points);
    for (int g = 0; g < marginal_points; ++g) {
        grid[g] = grid_hi * static_cast<double>(g) / static_cast<double>(marginal_points - 1);
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        const double obs = observations[i];
        double crps = 0.0;
        double pit = 0.0;
        cdf_rows[i].resize(grid.size());
        if (rec.kind == ForecastRecord::Kind::gln) {
            crps = crps_gln(rec.gln, obs);
            pit = pit_gln(rec.gln, obs);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                cdf_rows[i][g] = gln_cdf(grid[g], rec.gln);
            }
        } else {
            const auto& members = member_lists[i];
            crps = crps_ensemble(members, obs);
            pit = pit_ensemble(members, obs, rng);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const auto it = std::upper_bound(members.begin(), members.end(), grid[g]);
                cdf_rows[i][g] = static_cast<double>(it - members.begin()) /
                                 static_cast<double>(members.size());
            }
        }
        sum += crps;
        sum_sq += crps * crps;
        const int bin = std::min(pit_bins - 1,
                                 static_cast<int>(pit * static_cast<double>(pit_bins)));
        ++report.pit_counts[std::max(0, bin)];
        report.per_time_crps.emplace_back(rec.target_time, crps);
    }

    const double n = static_cast<double>(records.size());
    const double mean = sum / n;
    const double var = n > 1.0 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
    report.n_scored = static_cast<long>(records.size());
    report.mean_crps_pct = 100.0 * mean / capacity;
    report.crps_sd_pct = 100.0 * std::sqrt(var) / capacity;
    report.marginal = marginal_curve(cdf_rows, observations, std::move(grid));
    return report;
}

}  // namespace bts
