#pragma once

#include <span>

#include "bts/rng.hpp"

namespace bts {

// Generalized logit-normal distribution on (0, b).
//
// X ~ GLN(mu, sigma2, nu, b) means gamma(X/b; nu) ~ N(mu, sigma2) with
// gamma(u; nu) = log(u^nu / (1 - u^nu)). nu = 1 recovers the plain
// logit-normal.
struct GlnParams {
    double mu = 0.0;
    double sigma2 = 1.0;
    double nu = 1.0;
    double b = 1.0;

    // Throws std::invalid_argument when sigma2, nu or b is not a positive
    // finite number or mu is not finite.
    void validate() const;
};

// gamma(u; nu), strictly increasing in u on (0,1). Evaluated as
// nu*log(u) - log(-expm1(nu*log(u))) so u near either endpoint survives.
// Throws std::domain_error for u outside (0,1) or nu <= 0.
double logit_transform(double u, double nu);

// Exact inverse of logit_transform in u: sigmoid(y)^(1/nu), in (0,1).
double inverse_transform(double y, double nu);

// Density. Returns 0 (not an error) for x <= 0 or x >= b.
double gln_pdf(double x, const GlnParams& params);

// log pdf; -inf off support.
double gln_log_pdf(double x, const GlnParams& params);

// Distribution function: 0 for x <= 0, 1 for x >= b, Phi((gamma - mu)/sigma) inside.
double gln_cdf(double x, const GlnParams& params);

// Quantile, closed form b * sigmoid(mu + sigma * Phi^-1(p))^(1/nu).
// Throws std::domain_error unless 0 < prob < 1.
double gln_quantile(double prob, const GlnParams& params);

// One draw, strictly inside (0, b).
double gln_sample(const GlnParams& params, RandomStream& rng);

// AR conditional location on the transformed scale:
//   mu_t = sum_k lambdas[k] * gamma(lags[k] / b; nu)
// lags[k] holds x_{t-1-k} (most recent first). Every lag must lie strictly
// in (0, b); otherwise std::domain_error (callers must project or use the
// extended likelihood).
double conditional_mean_mu(std::span<const double> lags, std::span<const double> lambdas,
                           double nu, double b);

}  // namespace bts
