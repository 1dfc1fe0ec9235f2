#include "bts/optimizers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bts {

void NgdConfig::validate() const {
    if (iterations < 1 || !(learning_rate > 0.0) || !(alpha > 0.0 && alpha < 1.0) ||
        batch_length < 2 || update_every < 1) {
        throw std::invalid_argument("NgdConfig: bad hyperparameters");
    }
}

ParamVector ngd_fit(const SeriesWindow& window, const ParamVector& theta0,
                    const NgdConfig& config) {
    config.validate();
    const WindowEvaluator eval(window, WindowWeights::exponential(config.alpha));

    ParamVector x = theta0;
    ParamVector best = theta0;
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd grad(theta0.dim());

    for (int i = 0; i < config.iterations; ++i) {
        const double value = eval.value_and_grad(x, grad);
        if (std::isfinite(value) && value < best_value) {
            best_value = value;
            best = x;
        }
        if (config.freeze_b) grad[x.dim() - 1] = 0.0;
        const double norm = grad.norm();
        if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(value)) break;
        x.raw() -= (config.learning_rate / norm) * grad;
    }
    return best;
}

RmleState rmle_init_at(const ParamVector& theta, double alpha,
                       std::optional<double> fixed_bound) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("rmle_init: alpha must be in (0,1)");
    }
    RmleState state{theta, Eigen::MatrixXd(), alpha, fixed_bound};
    if (fixed_bound) state.theta.b() = *fixed_bound;
    state.P = 1e6 * Eigen::MatrixXd::Identity(state.free_dim(), state.free_dim());
    return state;
}

RmleState rmle_init(const SeriesWindow& warmup, double alpha, std::optional<double> fixed_bound,
                    const ParamVector& theta0, const NgdConfig& ngd) {
    warmup.validate();
    NgdConfig cfg = ngd;
    cfg.freeze_b = fixed_bound.has_value();
    ParamVector start = theta0;
    if (fixed_bound) start.b() = *fixed_bound;
    RmleState state = rmle_init_at(ngd_fit(warmup, start, cfg), alpha, fixed_bound);

    // Seed P with the warm sample's information: run the covariance
    // recursion over the warm-up scores at the fitted estimate, theta held
    // fixed. Handing the huge cold-start P straight to live tracking lets
    // the first few updates throw theta out of the warm basin, where the
    // score explodes.
    const int d = state.free_dim();
    for (std::int64_t j = warmup.j0; j <= warmup.last(); ++j) {
        const Eigen::VectorXd h = -grad_per_obs(j, warmup, state.theta).head(d);
        state.P = rmle_covariance_update(state.P, h, alpha);
    }
    return state;
}

Eigen::MatrixXd rmle_covariance_update(const Eigen::MatrixXd& P, const Eigen::VectorXd& h,
                                       double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("rmle_covariance_update: alpha must be in (0,1)");
    }
    const Eigen::VectorXd Ph = P * h;
    const double denom = alpha / (1.0 - alpha) + h.dot(Ph);
    Eigen::MatrixXd next = (P - Ph * Ph.transpose() / denom) / alpha;
    next = 0.5 * (next + next.transpose()).eval();
    return next;
}

RmleState rmle_step(RmleState state, double new_obs, std::span<const double> lags) {
    const int p = state.theta.order();
    if (static_cast<int>(lags.size()) != p) {
        throw std::invalid_argument("rmle_step: need exactly p lags");
    }

    // single-term window: values = (x_{t-p}, ..., x_{t-1}, x_t), term index p
    SeriesWindow w;
    w.order = p;
    w.j0 = p;
    w.values.resize(p + 1);
    for (int k = 0; k < p; ++k) w.values[p - 1 - k] = lags[k];
    w.values[p] = new_obs;

    const Eigen::VectorXd h_full = -grad_per_obs(p, w, state.theta);
    const int d = state.free_dim();
    const Eigen::VectorXd h = h_full.head(d);

    Eigen::MatrixXd P_next = rmle_covariance_update(state.P, h, state.alpha);

    const bool finite = P_next.allFinite();
    const bool pd = finite && Eigen::LLT<Eigen::MatrixXd>(P_next).info() == Eigen::Success;
    if (!pd) {
        state.last_step_rejected = true;
        ++state.rejected_steps;
        return state;
    }

    state.P = std::move(P_next);
    state.theta.raw().head(d) += (1.0 - state.alpha) * (state.P * h);
    state.last_step_rejected = false;
    return state;
}

OngdState ongd_step(OngdState state, const SeriesWindow& minibatch) {
    if (minibatch.term_count() != state.minibatch) {
        throw std::invalid_argument("ongd_step: window must carry exactly m terms");
    }
    Eigen::VectorXd grad(state.theta.dim());
    const double value = neg_loglik_with_grad(minibatch, state.theta, WindowWeights::rect(), grad);
    const double norm = grad.norm();
    if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(value)) {
        state.last_step_degenerate = true;
        return state;
    }
    state.theta.raw() -= (state.eta / norm) * grad;
    state.last_step_degenerate = false;
    ++state.steps;
    return state;
}

bool ongd_push(OngdState& state, double x, std::int64_t t) {
    const int p = state.theta.order();
    const std::size_t need = static_cast<std::size_t>(state.minibatch + p);
    state.buffer.push_back(x);
    if (state.buffer.size() > need) state.buffer.erase(state.buffer.begin());
    if (state.buffer.size() < need) return false;

    SeriesWindow w;
    w.order = p;
    w.values = state.buffer;
    w.j0 = t - state.minibatch + 1;
    state = ongd_step(std::move(state), w);
    return true;
}

bool is_divergent(const ParamVector& theta) {
    if (!theta.all_finite()) return true;
    return theta.raw().cwiseAbs().maxCoeff() > 1e6;
}

}  // namespace bts
