#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bts {

// Deterministic bound trajectory b_t.
struct BoundCurve {
    enum class Kind { constant, sinusoid, piecewise };
    Kind kind = Kind::constant;
    double base = 1.0;       // constant value or sinusoid midline
    double amplitude = 0.0;  // sinusoid
    double period = 6000.0;  // sinusoid
    // piecewise-constant steps: (start index, value), sorted by start
    std::vector<std::pair<std::int64_t, double>> knots;

    double at(std::int64_t t) const;
    void validate() const;

    static BoundCurve constant(double value);
    static BoundCurve sinusoid(double base, double amplitude, double period);
    static BoundCurve piecewise(std::vector<std::pair<std::int64_t, double>> knots);

    // "constant:1.0" | "sinusoid:1.0:0.25:6000" | "piecewise:0=1.0,3000=0.8"
    static BoundCurve parse(const std::string& text);
    std::string str() const;
};

struct SyntheticConfig {
    std::int64_t length = 12000;          // T
    std::vector<double> lambdas = {0.9};  // AR coefficients, order p = size
    double sigma2 = 1.0;
    double nu = 1.5;
    BoundCurve bound = BoundCurve::sinusoid(1.0, 0.25, 6000.0);
    std::uint64_t seed = 1;
    double delta = 0.001;  // lag coarsening margin under a falling bound

    int order() const { return static_cast<int>(lambdas.size()); }
    void validate() const;
};

struct SyntheticTruth {
    std::vector<double> series;  // x_t, strictly inside (0, b_t)
    std::vector<double> bounds;  // b_t
    std::vector<double> lambdas;
    double sigma2 = 1.0;
    double nu = 1.0;
};

double bound_at(std::int64_t t, const BoundCurve& curve);

// x_t = b_t * inverse_transform(y_t, nu), y_t ~ N(mu_t, sigma2) with
// mu_t = sum_k lambda_k * gamma(x_{t-k}/b_t; nu); the first p draws are
// unconditional (mu = 0). Lags are transformed against the current b_t and
// coarsened to b_t - delta when a falling bound overtakes them.
// Bit-reproducible for a given seed.
SyntheticTruth generate(const SyntheticConfig& config);

}  // namespace bts
