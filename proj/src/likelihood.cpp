#include "bts/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace bts {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double softplus(double v) {
    if (v > 0.0) return v + std::log1p(std::exp(-v));
    return std::log1p(std::exp(v));
}

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double ev = std::exp(v);
    return ev / (1.0 + ev);
}

// Shared per-term kernel. Accumulates w * f_j into `loss` and, when `grad`
// is non-null, w * d f_j / d theta into it. log_values[i] caches
// log(window.values[i]).
struct TermKernel {
    const SeriesWindow& window;
    const ParamVector& theta;
    const double* log_values;  // may be null; then logs are taken on the fly

    double log_b = 0.0;
    double nu = 1.0;
    double inv_s2 = 1.0;

    TermKernel(const SeriesWindow& w, const ParamVector& th, const double* lv)
        : window(w), theta(th), log_values(lv) {
        nu = theta.nu();
        inv_s2 = std::exp(-theta.omega());
        log_b = theta.b() > 0.0 ? std::log(theta.b()) : 0.0;
    }

    double log_value(std::int64_t abs_index) const {
        const auto i = abs_index - window.first();
        return log_values ? log_values[i] : std::log(window.values[i]);
    }

    bool term_in_support(std::int64_t j) const {
        const double b = theta.b();
        for (int k = 0; k <= window.order; ++k) {
            if (!(window.at(j - k) < b)) return false;
        }
        return true;
    }

    void check_boundary(std::int64_t j) const {
        const double b = theta.b();
        for (int k = 0; k <= window.order; ++k) {
            if (window.at(j - k) == b) {
                throw std::domain_error(
                    "grad_per_obs: observation equals b (support membership boundary)");
            }
        }
    }

    // Adds w * f_j (and gradient) for one term.
    void accumulate(std::int64_t j, double w, double& loss, Eigen::VectorXd* grad) const {
        const int p = window.order;
        const double b = theta.b();

        if (!term_in_support(j)) {
            const double v = window.at(j) - b;  // -log s_j(b) = softplus(x_j - b)
            loss += w * softplus(v);
            if (grad) (*grad)[p + 2] += w * (-sigmoid(v));
            return;
        }

        // t_l = nu*log(x_l/b), e_l = (x_l/b)^nu, q_l = 1 - e_l, g_l = gamma(x_l/b; nu)
        double t[1 + 16];  // order capped by SeriesWindow::validate
        double e[1 + 16];
        double q[1 + 16];
        double g[1 + 16];
        for (int k = 0; k <= p; ++k) {
            const double tl = nu * (log_value(j - k) - log_b);
            const double ql = -std::expm1(tl);
            t[k] = tl;
            q[k] = ql;
            e[k] = 1.0 - ql;
            g[k] = tl - std::log(ql);
        }

        double mu = 0.0;
        for (int k = 1; k <= p; ++k) mu += theta.lambda(k - 1) * g[k];
        const double r = g[0] - mu;
        const double c = inv_s2 * r;

        loss += w * (0.5 * (kLog2Pi + theta.omega()) - theta.tau() + log_value(j) +
                     std::log(q[0]) + 0.5 * c * r);

        if (!grad) return;

        for (int k = 1; k <= p; ++k) (*grad)[k - 1] += w * (-c * g[k]);
        (*grad)[p] += w * (0.5 - 0.5 * c * r);

        double dmu_dtau = 0.0;   // d mu / d tau = sum_k lambda_k * t_{j-k} / q_{j-k}
        double dmu_db_num = 0.0; // sum_k lambda_k / q_{j-k}   (times -nu/b below)
        for (int k = 1; k <= p; ++k) {
            const double lk = theta.lambda(k - 1);
            dmu_dtau += lk * t[k] / q[k];
            dmu_db_num += lk / q[k];
        }
        (*grad)[p + 1] += w * (-1.0 - e[0] * t[0] / q[0] + c * (t[0] / q[0] - dmu_dtau));
        (*grad)[p + 2] += w * (nu * e[0] / (b * q[0]) + c * nu * (-1.0 / q[0] + dmu_db_num) / b);
    }
};

double weighted_sum(const SeriesWindow& window, const ParamVector& theta,
                    const WindowWeights& weights, const double* log_values,
                    Eigen::VectorXd* grad) {
    window.validate();
    if (theta.order() != window.order) {
        throw std::invalid_argument("likelihood: theta order does not match window order");
    }
    const TermKernel kernel(window, theta, log_values);
    const std::int64_t t = window.last();
    const double norm = weights.normalizer(window.term_count());

    double loss = 0.0;
    if (grad) grad->setZero(theta.dim());
    if (weights.kind == WindowWeights::Kind::exponential) {
        // walk backward so the weight recursion stays exact
        double w = 1.0;
        for (std::int64_t j = t; j >= window.j0; --j) {
            kernel.accumulate(j, w, loss, grad);
            w *= weights.alpha;
        }
    } else {
        for (std::int64_t j = window.j0; j <= t; ++j) kernel.accumulate(j, 1.0, loss, grad);
    }
    loss /= norm;
    if (grad) *grad /= norm;
    return loss;
}

}  // namespace

ParamVector ParamVector::from_natural(const std::vector<double>& lambdas, double sigma2, double nu,
                                      double b) {
    if (lambdas.empty()) throw std::invalid_argument("from_natural: need at least one lambda");
    if (!(sigma2 > 0.0) || !(nu > 0.0)) {
        throw std::invalid_argument("from_natural: sigma2 and nu must be positive");
    }
    ParamVector theta(static_cast<int>(lambdas.size()));
    for (std::size_t k = 0; k < lambdas.size(); ++k) theta.lambda(static_cast<int>(k)) = lambdas[k];
    theta.omega() = std::log(sigma2);
    theta.tau() = std::log(nu);
    theta.b() = b;
    return theta;
}

void SeriesWindow::validate() const {
    if (order < 1 || order > 16) {
        throw std::invalid_argument("SeriesWindow: order must be in [1, 16]");
    }
    if (static_cast<std::int64_t>(values.size()) < order + 1) {
        throw std::invalid_argument("SeriesWindow: need at least order+1 observations");
    }
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("SeriesWindow: observations must be positive and finite");
        }
    }
}

WindowWeights WindowWeights::exponential(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("WindowWeights: alpha must be in (0,1)");
    }
    return {Kind::exponential, alpha};
}

double WindowWeights::normalizer(std::int64_t term_count) const {
    if (kind == Kind::exponential) return 1.0 / (1.0 - alpha);
    return static_cast<double>(term_count);
}

double sigmoid_extension(double b, double x_j) {
    return sigmoid(b - x_j);
}

bool in_support(std::int64_t j, const SeriesWindow& window, double b) {
    for (int k = 0; k <= window.order; ++k) {
        if (!(window.at(j - k) < b)) return false;
    }
    return true;
}

SupportPartition classify_support(const SeriesWindow& window, const ParamVector& theta) {
    window.validate();
    SupportPartition part;
    for (std::int64_t j = window.j0; j <= window.last(); ++j) {
        if (in_support(j, window, theta.b())) {
            part.in_support.push_back(j);
        } else {
            part.out_support.push_back(j);
        }
    }
    return part;
}

double per_obs_loss(std::int64_t j, const SeriesWindow& window, const ParamVector& theta) {
    window.validate();
    if (j < window.j0 || j > window.last()) {
        throw std::invalid_argument("per_obs_loss: index outside window terms");
    }
    const TermKernel kernel(window, theta, nullptr);
    double loss = 0.0;
    kernel.accumulate(j, 1.0, loss, nullptr);
    return loss;
}

Eigen::VectorXd grad_per_obs(std::int64_t j, const SeriesWindow& window, const ParamVector& theta) {
    window.validate();
    if (j < window.j0 || j > window.last()) {
        throw std::invalid_argument("grad_per_obs: index outside window terms");
    }
    const TermKernel kernel(window, theta, nullptr);
    kernel.check_boundary(j);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.dim());
    double loss = 0.0;
    kernel.accumulate(j, 1.0, loss, &grad);
    return grad;
}

double neg_loglik(const SeriesWindow& window, const ParamVector& theta,
                  const WindowWeights& weights) {
    return weighted_sum(window, theta, weights, nullptr, nullptr);
}

Eigen::VectorXd grad_window(const SeriesWindow& window, const ParamVector& theta,
                            const WindowWeights& weights) {
    Eigen::VectorXd grad(theta.dim());
    weighted_sum(window, theta, weights, nullptr, &grad);
    return grad;
}

double neg_loglik_with_grad(const SeriesWindow& window, const ParamVector& theta,
                            const WindowWeights& weights, Eigen::VectorXd& grad) {
    return weighted_sum(window, theta, weights, nullptr, &grad);
}

WindowEvaluator::WindowEvaluator(SeriesWindow window, WindowWeights weights)
    : window_(std::move(window)), weights_(weights) {
    window_.validate();
    log_values_.reserve(window_.values.size());
    for (double v : window_.values) log_values_.push_back(std::log(v));
}

double WindowEvaluator::value(const ParamVector& theta) const {
    return weighted_sum(window_, theta, weights_, log_values_.data(), nullptr);
}

double WindowEvaluator::value_and_grad(const ParamVector& theta, Eigen::VectorXd& grad) const {
    return weighted_sum(window_, theta, weights_, log_values_.data(), &grad);
}

}  // namespace bts
