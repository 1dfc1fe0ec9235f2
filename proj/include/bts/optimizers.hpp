#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>

#include "bts/likelihood.hpp"

namespace bts {

struct NgdConfig {
    int iterations = 10000;        // I
    double learning_rate = 0.003;  // eta
    double alpha = 0.990;          // forgetting factor of the batch objective
    int batch_length = 1000;
    int update_every = 500;
    bool freeze_b = false;  // fixed-bound variant: the b coordinate never moves

    void validate() const;
};

// Batch normalized-gradient descent on the exponential-window extended
// negative log-likelihood over `window`. Each non-degenerate step has
// Euclidean length exactly eta; the returned estimate is the iterate with
// the lowest objective seen, not the last one. A zero-norm (or non-finite)
// gradient stops the loop early.
ParamVector ngd_fit(const SeriesWindow& window, const ParamVector& theta0, const NgdConfig& config);

// Recursive MLE state, covariance form. P lives on the free coordinates:
// all p+3 of them, or p+2 when the bound is frozen (fixed_bound set).
struct RmleState {
    ParamVector theta;
    Eigen::MatrixXd P;
    double alpha = 0.975;
    std::optional<double> fixed_bound;
    bool last_step_rejected = false;  // Cholesky failure on the latest update
    long rejected_steps = 0;

    int free_dim() const { return theta.dim() - (fixed_bound ? 1 : 0); }
};

// Warm start: theta from an NGD fit on the warm-up window (b frozen when
// fixed_bound is set). P starts from the 1e6 * I cold prior and is then
// burned in over the warm-up scores at the fitted estimate, i.e. it hands
// over the warm sample's inverse information rather than the cold prior:
// the cold prior makes the first live updates teleport theta out of the
// warm basin.
RmleState rmle_init(const SeriesWindow& warmup, double alpha, std::optional<double> fixed_bound,
                    const ParamVector& theta0, const NgdConfig& ngd);

// Cold start at a caller-supplied estimate: P = 1e6 * I on the free
// coordinates.
RmleState rmle_init_at(const ParamVector& theta, double alpha, std::optional<double> fixed_bound);

// Rank-one forgetting-factor update of the covariance matrix,
//   P_t = (1/alpha) [I - P h h^T / (alpha/(1-alpha) + h^T P h)] P,
// the matrix-inversion-lemma image of R_t = alpha R + (1-alpha) h h^T.
// Result is symmetrized.
Eigen::MatrixXd rmle_covariance_update(const Eigen::MatrixXd& P, const Eigen::VectorXd& h,
                                       double alpha);

// One update with the newest observation and its p lags (lags[0] = x_{t-1}).
// h_t is the gradient of log p_t (in support) or log s_t (out of support)
// at the previous estimate; P follows the rank-one covariance update, theta
// moves by (1-alpha) * P_t * h_t. A P update that loses positive
// definiteness is rejected: the state is returned unchanged except for the
// diagnostic flag.
RmleState rmle_step(RmleState state, double new_obs, std::span<const double> lags);

struct OngdState {
    ParamVector theta;
    double eta = 0.001;
    int minibatch = 100;  // m
    long steps = 0;
    bool last_step_degenerate = false;  // zero-norm minibatch gradient
    // most recent observations, oldest first; holds at most minibatch + p
    std::vector<double> buffer;

    OngdState(ParamVector theta0, double eta_, int m) : theta(std::move(theta0)), eta(eta_), minibatch(m) {
        if (m < 1 || !(eta > 0.0)) throw std::invalid_argument("OngdState: need m >= 1, eta > 0");
    }
};

// One normalized-gradient step on the minibatch-average loss
// (1/m) sum_{j=t-m+1}^t f_j. The window must carry exactly m terms plus lag
// context. No projection. Zero-norm gradient -> no-op step.
OngdState ongd_step(OngdState state, const SeriesWindow& minibatch);

// Feed one observation; steps once the buffer holds m terms with full lag
// context. Returns true when a step fired.
bool ongd_push(OngdState& state, double x, std::int64_t t);

// Tracking guard: any |theta_i| > 1e6 or a non-finite entry.
bool is_divergent(const ParamVector& theta);

}  // namespace bts
