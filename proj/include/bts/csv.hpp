#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bts/forecast.hpp"

namespace bts {

// A loaded series: x[i] observed at time index t[i]; t must be strictly
// increasing. b_true is present for synthetic truth files.
struct SeriesData {
    std::vector<std::int64_t> t;
    std::vector<double> x;
    std::vector<double> b_true;
    bool has_b_true = false;

    std::size_t size() const { return x.size(); }
};

// One tracked estimate per time step, natural units.
struct TrajectoryRecord {
    std::int64_t t = 0;
    std::vector<double> lambdas;
    double sigma2 = 1.0;
    double nu = 1.0;
    double b_hat = 1.0;
    double b_tilde = 1.0;
    double loss = 0.0;
};

// 17-significant-digit formatting; read-back reproduces the double exactly.
std::string format_double(double v);

SeriesData read_series_csv(const std::string& path);
void write_series_csv(const std::string& path, const SeriesData& data);

std::vector<TrajectoryRecord> read_trajectory_csv(const std::string& path);
void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryRecord>& records);

std::vector<ForecastRecord> read_forecast_csv(const std::string& path);
void write_forecast_csv(const std::string& path, const std::vector<ForecastRecord>& records);

}  // namespace bts
