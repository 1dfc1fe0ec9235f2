#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bts {

// Tracked parameter vector theta = (lambda_1..lambda_p, omega, tau, b) in
// unconstrained coordinates: omega = log(sigma2), tau = log(nu). b is left
// unconstrained while tracking; the extended likelihood keeps every value
// of it feasible.
class ParamVector {
  public:
    explicit ParamVector(int order) : v_(Eigen::VectorXd::Zero(order + 3)), p_(order) {
        if (order < 1) throw std::invalid_argument("ParamVector: order must be >= 1");
    }
    ParamVector(const Eigen::VectorXd& raw, int order) : v_(raw), p_(order) {
        if (order < 1 || raw.size() != order + 3) {
            throw std::invalid_argument("ParamVector: raw size must be order + 3");
        }
    }

    static ParamVector from_natural(const std::vector<double>& lambdas, double sigma2, double nu,
                                    double b);

    int order() const { return p_; }
    int dim() const { return p_ + 3; }

    double lambda(int k) const { return v_[k]; }  // k in [0, p)
    double omega() const { return v_[p_]; }
    double tau() const { return v_[p_ + 1]; }
    double b() const { return v_[p_ + 2]; }

    double sigma2() const { return std::exp(omega()); }
    double nu() const { return std::exp(tau()); }

    double& lambda(int k) { return v_[k]; }
    double& omega() { return v_[p_]; }
    double& tau() { return v_[p_ + 1]; }
    double& b() { return v_[p_ + 2]; }

    const Eigen::VectorXd& raw() const { return v_; }
    Eigen::VectorXd& raw() { return v_; }

    bool all_finite() const { return v_.allFinite(); }

  private:
    Eigen::VectorXd v_;
    int p_;
};

// A contiguous slice of the series carrying its own absolute time indices.
// Observations span [j0 - order, j0 - order + values.size() - 1]; likelihood
// terms run over j in [j0, last()], so the first `order` values are lag
// context only.
struct SeriesWindow {
    std::vector<double> values;
    std::int64_t j0 = 0;
    int order = 1;

    std::int64_t first() const { return j0 - order; }
    std::int64_t last() const { return first() + static_cast<std::int64_t>(values.size()) - 1; }
    std::int64_t term_count() const { return last() - j0 + 1; }

    double at(std::int64_t abs_index) const { return values[abs_index - first()]; }

    // Throws std::invalid_argument when there are not enough observations to
    // give every likelihood term its p lags.
    void validate() const;
};

struct WindowWeights {
    enum class Kind { rectangular, exponential };
    Kind kind = Kind::rectangular;
    double alpha = 0.0;  // exponential only, in (0,1)

    static WindowWeights rect() { return {Kind::rectangular, 0.0}; }
    static WindowWeights exponential(double alpha);

    // 1/(1-alpha) for the exponential window, term count otherwise.
    double normalizer(std::int64_t term_count) const;
};

// Index sets C_t(theta) (every x_{j-k} < b, k = 0..p) and its complement.
struct SupportPartition {
    std::vector<std::int64_t> in_support;
    std::vector<std::int64_t> out_support;
};

// s_j(b) = sigmoid(b - x_j), the soft stand-in for the off-support density.
double sigmoid_extension(double b, double x_j);

bool in_support(std::int64_t j, const SeriesWindow& window, double b);

SupportPartition classify_support(const SeriesWindow& window, const ParamVector& theta);

// f_j(theta): -log p_j(theta) when j is in support, -log s_j(b) otherwise.
// Finite for every finite theta.
double per_obs_loss(std::int64_t j, const SeriesWindow& window, const ParamVector& theta);

// Analytic gradient of per_obs_loss in (lambda_1..p, omega, tau, b).
// Throws std::domain_error when some x_{j-k} equals b exactly (support
// membership boundary; the objective is not differentiable there).
Eigen::VectorXd grad_per_obs(std::int64_t j, const SeriesWindow& window, const ParamVector& theta);

// Extended windowed negative log-likelihood:
//   (1/normalizer) * sum_j w_j * f_j(theta)
// with w_j = 1 (rectangular) or alpha^(t-j) (exponential).
double neg_loglik(const SeriesWindow& window, const ParamVector& theta,
                  const WindowWeights& weights);

Eigen::VectorXd grad_window(const SeriesWindow& window, const ParamVector& theta,
                            const WindowWeights& weights);

// Value and gradient in one pass; the optimizers' inner loop.
double neg_loglik_with_grad(const SeriesWindow& window, const ParamVector& theta,
                            const WindowWeights& weights, Eigen::VectorXd& grad);

// Owns a window and caches log(x_j) so repeated evaluations at different
// theta (thousands per batch fit) skip the per-point logs.
class WindowEvaluator {
  public:
    WindowEvaluator(SeriesWindow window, WindowWeights weights);

    double value(const ParamVector& theta) const;
    double value_and_grad(const ParamVector& theta, Eigen::VectorXd& grad) const;

    const SeriesWindow& window() const { return window_; }
    const WindowWeights& weights() const { return weights_; }

  private:
    SeriesWindow window_;
    WindowWeights weights_;
    std::vector<double> log_values_;
};

}  // namespace bts
