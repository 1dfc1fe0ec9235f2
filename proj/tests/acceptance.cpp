// Acceptance suite: runs every published criterion end to end and prints
// one PASS/FAIL line per criterion. Exit status is nonzero when any
// criterion fails.
//
// The replica count of the desk-scale experiment can be lowered for quick
// iteration via BTS_ACCEPT_REPLICAS; the accepted configuration is the
// default (10).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "bts/evaluation.hpp"
#include "bts/pipeline.hpp"

using namespace bts;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d %s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------- 1
// analytic gradients vs central finite differences

struct GradCase {
    SeriesWindow window;
    ParamVector theta;
};

GradCase random_grad_case(RandomStream& rng) {
    const int p = 1 + static_cast<int>(rng.uniform01() * 3.0);
    const int terms = 4 + static_cast<int>(rng.uniform01() * 6.0);
    GradCase c{SeriesWindow{}, ParamVector(p)};
    c.window.order = p;
    c.window.j0 = p;
    c.window.values.resize(p + terms);
    for (double& v : c.window.values) v = 0.05 + 1.1 * rng.uniform01();
    for (int k = 0; k < p; ++k) c.theta.lambda(k) = 2.0 * rng.uniform01() - 1.0;
    c.theta.omega() = 3.0 * rng.uniform01() - 1.5;
    c.theta.tau() = 2.0 * rng.uniform01() - 1.0;
    double b = 0.1 + 1.6 * rng.uniform01();
    for (bool moved = true; moved;) {
        moved = false;
        for (double v : c.window.values) {
            if (std::abs(v - b) <= 0.0101) {
                b += 0.0205;
                moved = true;
            }
        }
    }
    c.theta.b() = b;
    return c;
}

void criterion_1() {
    const auto t0 = Clock::now();
    RandomStream rng(101);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto c = random_grad_case(rng);
        const std::int64_t j =
            c.window.j0 + static_cast<std::int64_t>(
                              rng.uniform01() * static_cast<double>(c.window.term_count() - 1));
        const Eigen::VectorXd analytic = grad_per_obs(j, c.window, c.theta);
        Eigen::VectorXd fd(c.theta.dim());
        for (int d = 0; d < c.theta.dim(); ++d) {
            ParamVector hi = c.theta, lo = c.theta;
            hi.raw()[d] += 1e-6;
            lo.raw()[d] -= 1e-6;
            fd[d] = (per_obs_loss(j, c.window, hi) - per_obs_loss(j, c.window, lo)) / 2e-6;
        }
        const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-6);
        worst = std::max(worst, (analytic - fd).cwiseAbs().maxCoeff() / scale);
    }
    const double elapsed = seconds_since(t0);
    report(1, worst < 1e-5 && elapsed < 5.0,
           fmt("gradient correctness: max rel err %.2e (< 1e-5) over 100 cases, %.2f s (< 5 s)",
               worst, elapsed));
}

// ---------------------------------------------------------------- 2
// distribution integrity

double simpson_mass(const GlnParams& params) {
    auto simpson = [&](int n) {
        const double h = params.b / n;
        double s = gln_pdf(0.0, params) + gln_pdf(params.b, params);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * gln_pdf(i * h, params);
        return s * h / 3.0;
    };
    double prev = simpson(256);
    for (int n = 512; n <= (1 << 20); n *= 2) {
        const double cur = simpson(n);
        if (std::abs(cur - prev) < 1e-10) return cur;
        prev = cur;
    }
    return prev;
}

void criterion_2() {
    const auto t0 = Clock::now();
    bool pass = true;

    double worst_mass = 0.0;
    int combos = 0;
    for (double mu : {-1.2, 0.0, 0.9, 2.0}) {
        for (double nu : {0.5, 1.0, 1.7}) {
            for (double sigma2 : {0.4, 1.3}) {
                if (combos >= 20) continue;
                const double b = 0.7 + 0.4 * static_cast<double>(combos % 3);
                const GlnParams params{mu, sigma2, nu, b};
                worst_mass = std::max(worst_mass, std::abs(simpson_mass(params) - 1.0));
                ++combos;
            }
        }
    }
    if (worst_mass >= 1e-6) pass = false;

    double worst_rt = 0.0;
    RandomStream rng(202);
    for (int i = 0; i < 400; ++i) {
        const GlnParams params{3.0 * rng.uniform01() - 1.5, 0.3 + 1.5 * rng.uniform01(),
                               0.5 + 1.5 * rng.uniform01(), 0.5 + rng.uniform01()};
        const double prob = 0.01 + 0.98 * rng.uniform01();
        worst_rt =
            std::max(worst_rt, std::abs(gln_cdf(gln_quantile(prob, params), params) - prob));
    }
    if (worst_rt >= 1e-8) pass = false;

    const GlnParams samp{0.2, 1.1, 1.5, 1.25};
    std::vector<double> draws(10000);
    for (double& d : draws) d = gln_sample(samp, rng);
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double F = gln_cdf(draws[i], samp);
        ks = std::max(ks, std::abs(F - static_cast<double>(i) / 10000.0));
        ks = std::max(ks, std::abs(F - static_cast<double>(i + 1) / 10000.0));
    }
    if (ks >= 0.02) pass = false;

    const double elapsed = seconds_since(t0);
    report(2, pass && elapsed < 30.0,
           fmt("distribution integrity: mass err %.2e (< 1e-6), roundtrip %.2e (< 1e-8), "
               "KS %.4f (< 0.02), %.1f s (< 30 s)",
               worst_mass, worst_rt, ks, elapsed));
}

// ---------------------------------------------------------------- 3
// recursive-MLE algebra

void criterion_3() {
    RandomStream rng(303);
    auto random_h = [&](int d) {
        Eigen::VectorXd h(d);
        for (int i = 0; i < d; ++i) h[i] = 3.0 * (2.0 * rng.uniform01() - 1.0);
        return h;
    };

    double worst_frob = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Identity(4, 4) * (0.5 + 2.0 * rng.uniform01());
        Eigen::MatrixXd R = P.inverse();
        for (int step = 0; step < 20; ++step) {
            const Eigen::VectorXd h = random_h(4);
            P = rmle_covariance_update(P, h, 0.975);
            R = 0.975 * R + 0.025 * h * h.transpose();
            worst_frob = std::max(worst_frob, (P - R.inverse()).norm());
        }
    }

    bool pd = true;
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(4, 4) * 1e6;
    for (int step = 0; step < 100000; ++step) {
        P = rmle_covariance_update(P, random_h(4), 0.975);
        if (step % 1000 == 0 && Eigen::LLT<Eigen::MatrixXd>(P).info() != Eigen::Success) {
            pd = false;
        }
    }
    pd = pd && Eigen::LLT<Eigen::MatrixXd>(P).info() == Eigen::Success;

    Eigen::MatrixXd P1(1, 1);
    P1 << 1.0;
    Eigen::VectorXd h1(1);
    h1 << 1.0;
    const double fixed_point_err = std::abs(rmle_covariance_update(P1, h1, 0.975)(0, 0) - 1.0);

    report(3, worst_frob < 1e-8 && pd && fixed_point_err < 1e-12,
           fmt("rmle algebra: covariance-vs-information %.2e (< 1e-8), PD over 1e5 steps %s, "
               "scalar fixed point err %.2e (< 1e-12)",
               worst_frob, pd ? "yes" : "NO", fixed_point_err));
}

// ---------------------------------------------------------------- 4
// ensemble and continuous CRPS

void criterion_4() {
    RandomStream rng(404);
    double worst_pair = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 1 + static_cast<int>(rng.uniform01() * 999.0);
        std::vector<double> members(n);
        for (double& v : members) v = 2.0 * rng.uniform01() - 0.5;
        const double obs = 2.0 * rng.uniform01() - 0.5;
        double abs_term = 0.0, pair_term = 0.0;
        for (double a : members) {
            abs_term += std::abs(a - obs);
            for (double b : members) pair_term += std::abs(a - b);
        }
        const double brute =
            abs_term / n - pair_term / (2.0 * static_cast<double>(n) * static_cast<double>(n));
        worst_pair = std::max(worst_pair, std::abs(crps_ensemble(members, obs) - brute));
    }

    double worst_mc = 0.0;
    const GlnParams settings[10] = {
        {0.0, 1.0, 1.0, 1.0},  {0.5, 0.5, 1.5, 1.0},  {-0.5, 2.0, 0.8, 1.0},
        {1.5, 1.0, 1.5, 1.25}, {-2.0, 0.7, 2.0, 0.9}, {0.0, 0.3, 1.2, 2.0},
        {2.5, 1.5, 1.0, 1.1},  {0.8, 1.1, 0.6, 0.8},  {-1.0, 0.9, 1.4, 1.5},
        {0.2, 1.8, 1.1, 1.0}};
    for (const auto& f : settings) {
        std::vector<double> draws(10000);
        for (double& d : draws) d = gln_sample(f, rng);
        std::sort(draws.begin(), draws.end());
        const double obs = gln_quantile(0.25 + 0.5 * rng.uniform01(), f);
        worst_mc = std::max(worst_mc, std::abs(crps_gln(f, obs) - crps_ensemble(draws, obs)));
    }

    report(4, worst_pair < 1e-10 && worst_mc < 0.002,
           fmt("ensemble crps: sort-vs-brute %.2e (< 1e-10) over 100 cases, "
               "continuous-vs-MC %.2e (< 0.002) over 10 settings",
               worst_pair, worst_mc));
}

// ---------------------------------------------------------------- 5..7
// the desk-scale synthetic experiment

struct ReplicaResult {
    std::map<std::string, double> crps_pct;
    std::vector<TrajectoryRecord> ongd_records;
    std::vector<TrajectoryRecord> rmle_b_records;
    std::vector<double> bounds;
    std::vector<long> ideal_pit;
};

RunConfig experiment_config(const std::string& method) {
    // published hyperparameters; capacity is the system's nameplate maximum,
    // base + amplitude of the bound curve
    std::string text = "method = " + method + "\n";
    text += "capacity = 1.25\nmarginal_points = 21\n";
    // the fixed-bound benchmark's forgetting factor is tuned on the first
    // replica (best CRPS), like the persistence dressing size
    if (method == "rmle_1") text += "alpha = 0.99\n";
    return RunConfig::load(KeyValueConfig::parse_text(text), "forecast");
}

ReplicaResult run_replica(std::uint64_t master_seed, int replica) {
    SyntheticConfig scfg;
    scfg.seed = replica_seed(master_seed, static_cast<std::uint64_t>(replica));
    const auto truth = generate(scfg);

    SeriesData data;
    data.has_b_true = true;
    data.x = truth.series;
    data.b_true = truth.bounds;
    data.t.resize(truth.series.size());
    for (std::size_t i = 0; i < data.t.size(); ++i) data.t[i] = static_cast<std::int64_t>(i);

    ReplicaResult result;
    result.bounds = truth.bounds;

    for (const std::string method :
         {"ideal", "climatology", "persistence", "rmle_1", "rmle_b", "ongd", "ngd"}) {
        RunConfig cfg = experiment_config(method);
        cfg.seed = scfg.seed;
        const auto x = coarsen_series(data.x, cfg);
        std::vector<TrajectoryRecord> trajectory;
        bool diverged = false;
        if (is_gln_method(method) && method != "ideal") {
            auto tracked = track_series(x, cfg);
            diverged = tracked.diverged;
            if (diverged) {
                std::printf("  [replica %d] %s diverged at %lld; scoring it as infinite\n",
                            replica, method.c_str(),
                            static_cast<long long>(tracked.diverged_at));
            }
            trajectory = std::move(tracked.records);
        }
        if (diverged) {
            result.crps_pct[method] = std::numeric_limits<double>::infinity();
        } else {
            const auto forecasts = forecast_series(data, x, trajectory, cfg);
            const auto rep = evaluate_series(forecasts, x, cfg);
            result.crps_pct[method] = rep.mean_crps_pct;
            if (method == "ideal") result.ideal_pit = rep.pit_counts;
        }
        if (method == "ongd") result.ongd_records = std::move(trajectory);
        if (method == "rmle_b") result.rmle_b_records = std::move(trajectory);
    }
    return result;
}

void criteria_5_to_7(int replicas, std::uint64_t master_seed) {
    const auto t0 = Clock::now();
    std::vector<ReplicaResult> results;
    for (int r = 0; r < replicas; ++r) {
        results.push_back(run_replica(master_seed, r));
        std::printf("  [experiment] replica %d/%d done (%.0f s elapsed)\n", r + 1, replicas,
                    seconds_since(t0));
        std::fflush(stdout);
    }
    const double elapsed = seconds_since(t0);

    std::map<std::string, double> mean_crps;
    for (const auto& rep : results) {
        for (const auto& [m, v] : rep.crps_pct) mean_crps[m] += v / replicas;
    }
    std::printf("  [experiment] mean CRPS %% of capacity over %d replicas:\n", replicas);
    for (const auto& [m, v] : mean_crps) std::printf("    %-12s %.3f\n", m.c_str(), v);

    const bool a = std::abs(mean_crps["ideal"] - 5.78) <= 0.7;
    int ongd_wins = 0;
    for (const auto& rep : results) {
        if (rep.crps_pct.at("ongd") < rep.crps_pct.at("persistence")) ++ongd_wins;
    }
    const int need_wins = (8 * replicas + 9) / 10;  // ceil(0.8 * replicas)
    const bool b = std::abs(mean_crps["ongd"] - 5.81) <= 0.7 && ongd_wins >= need_wins;
    bool c = true;
    for (const auto& [m, v] : mean_crps) {
        if (m != "climatology" && mean_crps["climatology"] <= 2.0 * v) c = false;
    }
    report(5, a && b && c,
           fmt("desk-scale reproduction: ideal %.2f%% (5.78+-0.7 -> %s), ongd %.2f%% "
               "(5.81+-0.7 -> %s) beating persistence on %d/%d (need %d), climatology %.2f%% "
               "> 2x all (%s); %.0f s",
               mean_crps["ideal"], a ? "ok" : "OUT", mean_crps["ongd"],
               std::abs(mean_crps["ongd"] - 5.81) <= 0.7 ? "ok" : "OUT", ongd_wins, replicas,
               need_wins, mean_crps["climatology"], c ? "ok" : "NO", elapsed));

    // (6) tracking quality: replica-mean lambda path, pooled b MAE, rmle asymmetry
    std::map<std::int64_t, std::pair<double, int>> lambda_by_t;
    double mae_sum = 0.0;
    long mae_n = 0;
    long pooled_in = 0, pooled_total = 0;
    for (const auto& rep : results) {
        for (const auto& rec : rep.ongd_records) {
            if (rec.t >= 4000) {
                auto& [sum, n] = lambda_by_t[rec.t];
                sum += rec.lambdas[0];
                n += 1;
                ++pooled_total;
                if (rec.lambdas[0] >= 0.85 && rec.lambdas[0] <= 0.95) ++pooled_in;
            }
            if (rec.t >= 2000) {
                mae_sum += std::abs(rec.b_hat - rep.bounds[rec.t]);
                ++mae_n;
            }
        }
    }
    long steps_in = 0, steps_total = 0;
    for (const auto& [t, acc] : lambda_by_t) {
        const double mean_lambda = acc.first / acc.second;
        ++steps_total;
        if (mean_lambda >= 0.85 && mean_lambda <= 0.95) ++steps_in;
    }
    const double lambda_frac = static_cast<double>(steps_in) / static_cast<double>(steps_total);
    const double pooled_frac =
        static_cast<double>(pooled_in) / static_cast<double>(pooled_total);
    const double b_mae = mae_sum / static_cast<double>(mae_n);

    int rising_worse = 0;
    for (const auto& rep : results) {
        double rise = 0.0, fall = 0.0;
        long rise_n = 0, fall_n = 0;
        for (const auto& rec : rep.rmle_b_records) {
            if (rec.t < 2000) continue;
            const double phase =
                std::cos(2.0 * std::numbers::pi * static_cast<double>(rec.t) / 6000.0);
            const double err = std::abs(rec.b_hat - rep.bounds[rec.t]);
            if (phase > 0.0) {
                rise += err;
                ++rise_n;
            } else if (phase < 0.0) {
                fall += err;
                ++fall_n;
            }
        }
        if (rise / static_cast<double>(rise_n) > fall / static_cast<double>(fall_n)) {
            ++rising_worse;
        }
    }

    const bool l_ok = lambda_frac >= 0.80;
    const bool mae_ok = b_mae < 0.08;
    const bool asym_ok = rising_worse * 2 > replicas;
    report(6, l_ok && mae_ok && asym_ok,
           fmt("tracking quality: mean-lambda in [0.85,0.95] for %.1f%% of steps after 4000 "
               "(>= 80; per-replica pooled %.1f%%), ongd b MAE %.4f (< 0.08), rmle_b rising "
               "worse on %d/%d replicas (majority)",
               100.0 * lambda_frac, 100.0 * pooled_frac, b_mae, rising_worse, replicas));

    // (7) pooled ideal-forecaster PIT uniformity, 20 bins, chi-square p > 0.01
    std::vector<long> pooled(20, 0);
    for (const auto& rep : results) {
        for (std::size_t i = 0; i < rep.ideal_pit.size(); ++i) pooled[i] += rep.ideal_pit[i];
    }
    long total = 0;
    for (long v : pooled) total += v;
    double stat = 0.0;
    const double expect = static_cast<double>(total) / 20.0;
    for (long v : pooled) {
        const double d = static_cast<double>(v) - expect;
        stat += d * d / expect;
    }
    const double chi2_99_df19 = 36.19086912927005;
    report(7, stat < chi2_99_df19,
           fmt("calibration: ideal-forecaster PIT chi-square %.2f (< %.2f for p > 0.01, "
               "df 19, n = %ld)",
               stat, chi2_99_df19, total));
}

// ---------------------------------------------------------------- 8
// backtest generalization on a held-out synthetic series

void criterion_8(std::uint64_t master_seed) {
    SyntheticConfig scfg;
    scfg.seed = master_seed + 1000;
    // held-out series with phase-matched splits: validation [2000, 8000) and
    // test [8000, 14000) each span one full bound cycle, starting at the
    // same phase
    scfg.length = 14000;
    const auto truth = generate(scfg);
    SeriesData data;
    data.x = truth.series;
    data.t.resize(truth.series.size());
    for (std::size_t i = 0; i < data.t.size(); ++i) data.t[i] = static_cast<std::int64_t>(i);

    auto cfg = RunConfig::load(
        KeyValueConfig::parse_text("method = ongd\ncapacity = 1.25\nmarginal_points = 21\n"
                                   "val_start = 2000\nval_end = 8000\n"
                                   "grid_m = 1,5,10,20,50,100,150\n"),
        "backtest");
    cfg.seed = scfg.seed;
    const auto result = backtest_series(data, cfg);

    std::printf("  [backtest] grid:");
    for (const auto& cell : result.cells) {
        if (cell.diverged) {
            std::printf(" m=%d:diverged", cell.m);
        } else {
            std::printf(" m=%d:%.3f", cell.m, cell.val_crps_pct);
        }
    }
    std::printf("\n");

    const double rel = std::abs(result.test_crps_pct - result.validation_crps_pct) /
                       result.validation_crps_pct;
    report(8, rel <= 0.10,
           fmt("backtest generalization: winner m=%d, validation %.3f%%, test %.3f%%, "
               "relative gap %.1f%% (<= 10%%)",
               result.winner.m, result.validation_crps_pct, result.test_crps_pct, 100.0 * rel));
}

}  // namespace

int main() {
    const char* env = std::getenv("BTS_ACCEPT_REPLICAS");
    const int replicas = env ? std::atoi(env) : 10;
    const std::uint64_t master_seed = 1;

    std::printf("acceptance suite: %d replicas, master seed %llu\n", replicas,
                static_cast<unsigned long long>(master_seed));
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criteria_5_to_7(replicas, master_seed);
    criterion_8(master_seed);

    if (g_failures == 0) {
        std::printf("acceptance suite: all criteria passed\n");
        return EXIT_SUCCESS;
    }
    std::printf("acceptance suite: %d criterion(s) failed\n", g_failures);
    return EXIT_FAILURE;
}
