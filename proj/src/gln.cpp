#include "bts/gln.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bts/normal.hpp"

namespace bts {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log(1 + exp(v)) without overflow.
double softplus(double v) {
    if (v > 0.0) return v + std::log1p(std::exp(-v));
    return std::log1p(std::exp(v));
}

}  // namespace

void GlnParams::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma2) || !std::isfinite(nu) || !std::isfinite(b) ||
        sigma2 <= 0.0 || nu <= 0.0 || b <= 0.0) {
        throw std::invalid_argument("GlnParams: need finite mu and positive sigma2, nu, b");
    }
}

double logit_transform(double u, double nu) {
    if (!(u > 0.0 && u < 1.0) || !(nu > 0.0)) {
        throw std::domain_error("logit_transform: u must be in (0,1) and nu > 0");
    }
    const double t = nu * std::log(u);    // log(u^nu) <= 0
    const double q = -std::expm1(t);      // 1 - u^nu, in (0,1)
    return t - std::log(q);
}

double inverse_transform(double y, double nu) {
    if (!std::isfinite(y) || !(nu > 0.0)) {
        throw std::domain_error("inverse_transform: y must be finite and nu > 0");
    }
    // sigmoid(y)^(1/nu) = exp(log(sigmoid(y)) / nu), log(sigmoid(y)) = -softplus(-y)
    return std::exp(-softplus(-y) / nu);
}

double gln_log_pdf(double x, const GlnParams& params) {
    params.validate();
    if (!(x > 0.0 && x < params.b)) {
        return -std::numeric_limits<double>::infinity();
    }
    const double u = x / params.b;
    const double t = params.nu * std::log(u);
    const double q = -std::expm1(t);  // 1 - u^nu
    const double g = t - std::log(q);
    const double r = g - params.mu;
    return -0.5 * (kLog2Pi + std::log(params.sigma2)) + std::log(params.nu) - std::log(x) -
           std::log(q) - 0.5 * r * r / params.sigma2;
}

double gln_pdf(double x, const GlnParams& params) {
    params.validate();
    if (!(x > 0.0 && x < params.b)) return 0.0;
    return std::exp(gln_log_pdf(x, params));
}

double gln_cdf(double x, const GlnParams& params) {
    params.validate();
    if (x <= 0.0) return 0.0;
    if (x >= params.b) return 1.0;
    const double g = logit_transform(x / params.b, params.nu);
    return normal_cdf((g - params.mu) / std::sqrt(params.sigma2));
}

double gln_quantile(double prob, const GlnParams& params) {
    params.validate();
    if (!(prob > 0.0 && prob < 1.0)) {
        throw std::domain_error("gln_quantile: prob must be in (0,1)");
    }
    const double y = params.mu + std::sqrt(params.sigma2) * normal_quantile(prob);
    return params.b * inverse_transform(y, params.nu);
}

double gln_sample(const GlnParams& params, RandomStream& rng) {
    params.validate();
    const double y = rng.normal(params.mu, std::sqrt(params.sigma2));
    return params.b * inverse_transform(y, params.nu);
}

double conditional_mean_mu(std::span<const double> lags, std::span<const double> lambdas,
                           double nu, double b) {
    if (lags.size() != lambdas.size()) {
        throw std::invalid_argument("conditional_mean_mu: lags/lambdas size mismatch");
    }
    double mu = 0.0;
    for (std::size_t k = 0; k < lags.size(); ++k) {
        if (!(lags[k] > 0.0 && lags[k] < b)) {
            throw std::domain_error("conditional_mean_mu: lag outside (0,b)");
        }
        mu += lambdas[k] * logit_transform(lags[k] / b, nu);
    }
    return mu;
}

}  // namespace bts
