#include "bts/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "bts/gln.hpp"

namespace bts {

namespace {

const std::vector<std::string> kGlnMethods = {"ngd", "rmle_b", "rmle_1", "ongd", "ideal"};
const std::vector<std::string> kBenchmarks = {"climatology", "persistence"};

SeriesWindow slice_window(std::span<const double> x, std::int64_t first, std::int64_t last,
                          int p) {
    // values cover [first, last]; likelihood terms start at first + p
    SeriesWindow w;
    w.order = p;
    w.j0 = first + p;
    w.values.assign(x.begin() + first, x.begin() + last + 1);
    return w;
}

std::vector<double> recent_lags(std::span<const double> x, std::int64_t s, int p) {
    // lags[0] = x_s (most recent first)
    std::vector<double> recent(p);
    for (int k = 0; k < p; ++k) recent[k] = x[s - k];
    return recent;
}

TrajectoryRecord make_record(std::int64_t s, const ParamVector& theta, std::span<const double> x,
                             const RunConfig& cfg) {
    TrajectoryRecord rec;
    rec.t = s;
    rec.lambdas.resize(cfg.p);
    for (int k = 0; k < cfg.p; ++k) rec.lambdas[k] = theta.lambda(k);
    rec.sigma2 = theta.sigma2();
    rec.nu = theta.nu();
    rec.b_hat = theta.b();
    const auto recent = recent_lags(x, s, cfg.p);
    rec.b_tilde = project_theta(theta, recent, cfg.delta).theta_tilde.b();
    const auto w = slice_window(x, s - cfg.p, s, cfg.p);
    rec.loss = per_obs_loss(w.j0, w, theta);
    return rec;
}

ParamVector theta_from_record(const TrajectoryRecord& rec) {
    return ParamVector::from_natural(rec.lambdas, rec.sigma2, rec.nu, rec.b_hat);
}

double ensemble_quantile(const std::vector<double>& sorted, double prob) {
    if (sorted.empty()) throw std::invalid_argument("ensemble_quantile: empty");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

bool is_gln_method(const std::string& method) {
    return std::find(kGlnMethods.begin(), kGlnMethods.end(), method) != kGlnMethods.end();
}

bool is_benchmark_method(const std::string& method) {
    return std::find(kBenchmarks.begin(), kBenchmarks.end(), method) != kBenchmarks.end();
}

RunConfig RunConfig::load(const KeyValueConfig& kv, const std::string& command) {
    RunConfig cfg;
    cfg.method = kv.get_string("method", "ongd");
    const bool is_ngd = cfg.method == "ngd";

    cfg.seed = kv.get_uint("seed", 1);
    cfg.replicas = static_cast<int>(kv.get_int("replicas", 1));
    cfg.out_dir = kv.get_string("out", ".");
    cfg.data_path = kv.get_string("data", "");
    cfg.trajectory_path = kv.get_string("trajectory", "");
    cfg.forecast_path = kv.get_string("forecast", "");

    cfg.length = kv.get_int("T", 12000);
    cfg.lambdas = kv.get_double_list("lambda", {0.9});
    cfg.sigma2 = kv.get_double("sigma2", 1.0);
    cfg.nu = kv.get_double("nu", 1.5);
    try {
        cfg.bound = BoundCurve::parse(kv.get_string("bound", "sinusoid:1:0.25:6000"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    cfg.p = static_cast<int>(kv.get_int("p", 1));
    cfg.alpha = kv.get_double("alpha", is_ngd ? 0.990 : 0.975);
    cfg.eta = kv.get_double("eta", is_ngd ? 0.003 : 0.001);
    cfg.iterations = static_cast<int>(kv.get_int("iterations", 10000));
    cfg.m = static_cast<int>(kv.get_int("m", 100));
    cfg.batch_length = static_cast<int>(kv.get_int("batch_length", 1000));
    cfg.update_every = static_cast<int>(kv.get_int("update_every", 500));
    cfg.warmup = kv.get_int("warmup", 1000);
    cfg.fixed_bound = kv.get_double("fixed_bound", 1.0);
    cfg.init_lambda = kv.get_double_list("init_lambda", std::vector<double>(cfg.p, 0.0));
    cfg.init_sigma2 = kv.get_double("init_sigma2", 1.0);
    cfg.init_nu = kv.get_double("init_nu", 1.0);
    cfg.init_b = kv.get_double("init_b", 1.0);

    cfg.delta = kv.get_double("delta", 0.001);
    cfg.capacity = kv.get_double("capacity", 1.0);
    cfg.coarsen_upper = kv.get_bool("coarsen_upper", true);

    cfg.forecast_start = kv.get_int("forecast_start", 2000);
    cfg.n_err = static_cast<int>(kv.get_int("n_err", 100));
    cfg.clim_cap = kv.get_int("clim_cap", 5000);
    cfg.pit_bins = static_cast<int>(kv.get_int("pit_bins", 20));
    cfg.marginal_points = static_cast<int>(kv.get_int("marginal_points", 101));
    cfg.baselines = kv.get_prefixed("baseline_");

    cfg.val_start = kv.get_int("val_start", -1);
    cfg.val_end = kv.get_int("val_end", -1);
    cfg.test_end = kv.get_int("test_end", -1);
    cfg.grid_m = kv.get_int_list("grid_m", {});
    cfg.grid_eta = kv.get_double_list("grid_eta", {});
    cfg.grid_alpha = kv.get_double_list("grid_alpha", {});

    kv.ensure_all_consumed();

    require(cfg.replicas >= 1, "replicas must be >= 1");
    require(cfg.length >= 2, "T must be >= 2");
    require(!cfg.lambdas.empty(), "lambda must be non-empty");
    require(cfg.sigma2 > 0.0 && cfg.nu > 0.0, "sigma2 and nu must be > 0");
    require(cfg.p >= 1 && cfg.p <= 16, "p must be in [1,16]");
    require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha must be in (0,1)");
    require(cfg.eta > 0.0, "eta must be > 0");
    require(cfg.iterations >= 1, "iterations must be >= 1");
    require(cfg.m >= 1, "m must be >= 1");
    require(cfg.batch_length >= cfg.p + 2, "batch_length too small");
    require(cfg.update_every >= 1, "update_every must be >= 1");
    require(cfg.warmup > cfg.p + 1, "warmup must exceed p + 1");
    require(static_cast<int>(cfg.init_lambda.size()) == cfg.p, "init_lambda must have p entries");
    require(cfg.init_sigma2 > 0.0 && cfg.init_nu > 0.0, "init_sigma2 and init_nu must be > 0");
    require(cfg.delta > 0.0, "delta must be > 0");
    require(cfg.capacity > 2.0 * cfg.delta, "capacity must exceed 2*delta");
    require(cfg.forecast_start > cfg.p, "forecast_start must exceed p");
    require(cfg.n_err >= 1, "n_err must be >= 1");
    require(cfg.clim_cap >= 1, "clim_cap must be >= 1");
    require(cfg.pit_bins >= 1, "pit_bins must be >= 1");
    require(cfg.marginal_points >= 2, "marginal_points must be >= 2");
    require(cfg.fixed_bound > 0.0, "fixed_bound must be > 0");

    if (command == "track" || command == "backtest") {
        require(cfg.method != "ideal" || command != "track",
                "the ideal forecaster is not tracked; use it with the forecast command");
    }
    if (cfg.trajectory_path.empty()) {
        cfg.trajectory_path = cfg.out_dir + "/trajectory_" + cfg.method + ".csv";
    }
    if (cfg.forecast_path.empty()) {
        cfg.forecast_path = cfg.out_dir + "/forecast_" + cfg.method + ".csv";
    }
    return cfg;
}

ParamVector RunConfig::initial_theta() const {
    return ParamVector::from_natural(init_lambda, init_sigma2, init_nu, init_b);
}

NgdConfig RunConfig::ngd_config() const {
    NgdConfig ngd;
    ngd.iterations = iterations;
    ngd.learning_rate = method == "ngd" ? eta : 0.003;
    ngd.alpha = method == "ngd" ? alpha : 0.990;
    ngd.batch_length = batch_length;
    ngd.update_every = update_every;
    return ngd;
}

double RunConfig::clip_hi() const {
    return coarsen_upper ? capacity - delta : std::numeric_limits<double>::infinity();
}

std::vector<double> coarsen_series(std::vector<double> x, const RunConfig& cfg) {
    const double hi = cfg.clip_hi();
    for (double& v : x) {
        if (v < cfg.delta) v = cfg.delta;
        if (v > hi) v = hi;
    }
    return x;
}

TrackResult track_series(std::span<const double> x, const RunConfig& cfg) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const int p = cfg.p;
    TrackResult result;

    auto diverged_at = [&](std::int64_t s, const ParamVector& theta) {
        if (!is_divergent(theta)) return false;
        result.diverged = true;
        result.diverged_at = s;
        return true;
    };
    // a non-finite per-step loss also flags the run
    auto emit = [&](std::int64_t s, const ParamVector& theta) {
        auto rec = make_record(s, theta, x, cfg);
        if (!std::isfinite(rec.loss)) {
            result.diverged = true;
            result.diverged_at = s;
            return false;
        }
        result.records.push_back(std::move(rec));
        return true;
    };

    if (cfg.method == "ngd") {
        if (n <= cfg.warmup) throw DataError("track: series shorter than warm-up");
        ParamVector theta = cfg.initial_theta();
        std::int64_t next_refit = cfg.warmup;
        for (std::int64_t s = cfg.warmup; s < n; ++s) {
            if (s == next_refit) {
                const std::int64_t lo = std::max<std::int64_t>(0, s - cfg.batch_length);
                theta = ngd_fit(slice_window(x, lo, s - 1, p), theta, cfg.ngd_config());
                next_refit += cfg.update_every;
                if (diverged_at(s, theta)) break;
            }
            if (!emit(s, theta)) break;
        }
        return result;
    }

    if (cfg.method == "rmle_b" || cfg.method == "rmle_1") {
        if (n <= cfg.warmup) throw DataError("track: series shorter than warm-up");
        std::optional<double> fixed;
        if (cfg.method == "rmle_1") fixed = cfg.fixed_bound;

        // The fixed-bound model coarsens its own view of the data into its
        // support; otherwise observations above the frozen bound carry no
        // information for the free coordinates. Projection at forecast time
        // still sees the raw series.
        std::vector<double> model_view;
        std::span<const double> xm = x;
        if (fixed) {
            model_view.assign(x.begin(), x.end());
            for (double& v : model_view) v = std::min(v, *fixed - cfg.delta);
            xm = model_view;
        }

        RmleState state = rmle_init(slice_window(xm, 0, cfg.warmup - 1, p), cfg.alpha, fixed,
                                    cfg.initial_theta(), cfg.ngd_config());
        for (std::int64_t s = cfg.warmup; s < n; ++s) {
            state = rmle_step(std::move(state), xm[s], recent_lags(xm, s - 1, p));
            if (diverged_at(s, state.theta)) break;
            if (!emit(s, state.theta)) break;
        }
        return result;
    }

    if (cfg.method == "ongd") {
        if (n < cfg.m + p) throw DataError("track: series shorter than one minibatch");
        OngdState state(cfg.initial_theta(), cfg.eta, cfg.m);
        for (std::int64_t s = 0; s < n; ++s) {
            if (!ongd_push(state, x[s], s)) continue;
            if (diverged_at(s, state.theta)) break;
            if (!emit(s, state.theta)) break;
        }
        return result;
    }

    throw ConfigError("track: unknown method '" + cfg.method + "'");
}

std::vector<ForecastRecord> forecast_series(const SeriesData& data, std::span<const double> x,
                                            const std::vector<TrajectoryRecord>& trajectory,
                                            const RunConfig& cfg) {
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    const int p = cfg.p;
    if (cfg.forecast_start >= n - 1) {
        throw DataError("forecast: nothing to issue (forecast_start beyond the series)");
    }
    std::vector<ForecastRecord> out;

    if (cfg.method == "ideal") {
        if (!data.has_b_true) throw DataError("forecast: ideal needs a b_true column");
        if (static_cast<int>(cfg.lambdas.size()) != p) {
            throw ConfigError("forecast: ideal needs p lambda entries");
        }
        for (std::int64_t s = cfg.forecast_start; s + 1 < n; ++s) {
            const double b_next = data.b_true[s + 1];
            double mu = 0.0;
            for (int k = 1; k <= p; ++k) {
                const double lag = std::min(x[s + 1 - k], b_next - cfg.delta);
                mu += cfg.lambdas[k - 1] * logit_transform(lag / b_next, cfg.nu);
            }
            ForecastRecord rec;
            rec.issue_time = s;
            rec.target_time = s + 1;
            rec.kind = ForecastRecord::Kind::gln;
            rec.gln = GlnForecast{mu, cfg.sigma2, cfg.nu, b_next};
            out.push_back(std::move(rec));
        }
        return out;
    }

    if (is_gln_method(cfg.method)) {
        std::map<std::int64_t, const TrajectoryRecord*> by_t;
        for (const auto& rec : trajectory) by_t[rec.t] = &rec;
        for (std::int64_t s = cfg.forecast_start; s + 1 < n; ++s) {
            const auto it = by_t.find(s);
            if (it == by_t.end()) {
                throw DataError("forecast: trajectory has no estimate at time " +
                                std::to_string(s));
            }
            const ParamVector theta = theta_from_record(*it->second);
            const auto recent = recent_lags(x, s, p);
            const auto projected = project_theta(theta, recent, cfg.delta);
            ForecastRecord rec;
            rec.issue_time = s;
            rec.target_time = s + 1;
            rec.kind = ForecastRecord::Kind::gln;
            rec.gln = predictive_distribution(projected, recent);
            out.push_back(std::move(rec));
        }
        return out;
    }

    if (cfg.method == "climatology") {
        for (std::int64_t s = cfg.forecast_start; s + 1 < n; ++s) {
            ForecastRecord rec;
            rec.issue_time = s;
            rec.target_time = s + 1;
            rec.kind = ForecastRecord::Kind::ensemble;
            rec.ensemble_ref = make_climatology_ref(0, s, static_cast<std::size_t>(cfg.clim_cap));
            out.push_back(std::move(rec));
        }
        return out;
    }

    if (cfg.method == "persistence") {
        if (cfg.forecast_start < cfg.n_err + 1) {
            throw DataError("forecast: persistence needs n_err + 1 observations before start");
        }
        for (std::int64_t s = cfg.forecast_start; s + 1 < n; ++s) {
            ForecastRecord rec;
            rec.issue_time = s;
            rec.target_time = s + 1;
            rec.kind = ForecastRecord::Kind::ensemble;
            rec.ensemble_ref = make_persistence_ref(s, cfg.n_err, cfg.delta, cfg.clip_hi());
            out.push_back(std::move(rec));
        }
        return out;
    }

    throw ConfigError("forecast: unknown method '" + cfg.method + "'");
}

EvalReport evaluate_series(const std::vector<ForecastRecord>& records, std::span<const double> x,
                           const RunConfig& cfg) {
    if (records.empty()) throw DataError("evaluate: no overlapping timestamps");
    RandomStream rng(cfg.seed);
    EvalReport report =
        evaluate_records(records, x, cfg.capacity, cfg.pit_bins, cfg.marginal_points, rng);
    for (const auto& [name, path] : cfg.baselines) {
        const double base = read_report_crps(path);
        report.improvements_pct[name] = 100.0 * improvement(report.mean_crps_pct, base);
    }
    return report;
}

BacktestResult backtest_series(const SeriesData& data, const RunConfig& cfg) {
    const std::int64_t n = static_cast<std::int64_t>(data.size());
    require(cfg.val_start > 0 && cfg.val_end > cfg.val_start,
            "backtest: need 0 < val_start < val_end");
    const std::int64_t test_end = cfg.test_end < 0 ? n : cfg.test_end;
    require(cfg.val_end < test_end && test_end <= n,
            "backtest: need val_end < test_end <= series length");
    require(cfg.val_start > cfg.warmup + 1 && cfg.val_start > cfg.m + cfg.p,
            "backtest: val_start must leave room for warm-up");
    if (is_benchmark_method(cfg.method) && cfg.method == "climatology") {
        require(cfg.grid_m.empty() && cfg.grid_eta.empty() && cfg.grid_alpha.empty(),
                "backtest: climatology has no hyperparameters to search");
    }

    std::vector<std::int64_t> ms = cfg.grid_m;
    std::vector<double> etas = cfg.grid_eta;
    std::vector<double> alphas = cfg.grid_alpha;
    if (ms.empty()) {
        if (cfg.method == "ongd") {
            ms = {1, 5, 10, 20, 50, 100, 150};
        } else if (cfg.method == "persistence") {
            ms = {cfg.n_err};
        } else {
            ms = {cfg.m};
        }
    }
    if (etas.empty()) etas = {cfg.eta};
    if (alphas.empty()) alphas = {cfg.alpha};
    if (ms.empty() || etas.empty() || alphas.empty()) throw ConfigError("backtest: empty grid");

    const std::vector<double> x_full = coarsen_series(data.x, cfg);
    const std::vector<double> x_val(x_full.begin(), x_full.begin() + cfg.val_end);

    BacktestResult result;
    for (const std::int64_t m : ms) {
        for (const double eta : etas) {
            for (const double alpha : alphas) {
                RunConfig sub = cfg;
                sub.m = static_cast<int>(m);
                sub.eta = eta;
                sub.alpha = alpha;
                if (cfg.method == "persistence") sub.n_err = static_cast<int>(m);
                sub.forecast_start = cfg.val_start - 1;

                BacktestCell cell;
                cell.m = static_cast<int>(m);
                cell.eta = eta;
                cell.alpha = alpha;
                try {
                    std::vector<TrajectoryRecord> trajectory;
                    if (!is_benchmark_method(cfg.method) && cfg.method != "ideal") {
                        TrackResult tracked = track_series(x_val, sub);
                        if (tracked.diverged) {
                            cell.diverged = true;
                            cell.val_crps_pct = std::numeric_limits<double>::infinity();
                            result.cells.push_back(cell);
                            continue;
                        }
                        trajectory = std::move(tracked.records);
                    }
                    SeriesData val_data = data;
                    val_data.t.resize(cfg.val_end);
                    val_data.x.resize(cfg.val_end);
                    if (val_data.has_b_true) val_data.b_true.resize(cfg.val_end);
                    const auto forecasts = forecast_series(val_data, x_val, trajectory, sub);
                    cell.val_crps_pct = evaluate_series(forecasts, x_val, sub).mean_crps_pct;
                } catch (const DataError&) {
                    cell.diverged = true;
                    cell.val_crps_pct = std::numeric_limits<double>::infinity();
                }
                result.cells.push_back(cell);
            }
        }
    }

    const auto better = [](const BacktestCell& a, const BacktestCell& b) {
        if (a.val_crps_pct != b.val_crps_pct) return a.val_crps_pct < b.val_crps_pct;
        if (a.m != b.m) return a.m < b.m;
        if (a.eta != b.eta) return a.eta < b.eta;
        return a.alpha < b.alpha;
    };
    result.winner = *std::min_element(result.cells.begin(), result.cells.end(), better);
    if (!std::isfinite(result.winner.val_crps_pct)) {
        throw DataError("backtest: every grid cell diverged or failed");
    }
    result.validation_crps_pct = result.winner.val_crps_pct;

    RunConfig final_cfg = cfg;
    final_cfg.m = result.winner.m;
    final_cfg.eta = result.winner.eta;
    final_cfg.alpha = result.winner.alpha;
    if (cfg.method == "persistence") final_cfg.n_err = result.winner.m;
    final_cfg.forecast_start = cfg.val_end - 1;

    std::vector<TrajectoryRecord> trajectory;
    if (!is_benchmark_method(cfg.method) && cfg.method != "ideal") {
        TrackResult tracked = track_series(x_full, final_cfg);
        if (tracked.diverged) throw DataError("backtest: winning configuration diverged on test");
        trajectory = std::move(tracked.records);
    }
    auto forecasts = forecast_series(data, x_full, trajectory, final_cfg);
    std::erase_if(forecasts, [&](const ForecastRecord& rec) {
        return rec.target_time < cfg.val_end || rec.target_time >= test_end;
    });
    result.test_report = evaluate_series(forecasts, x_full, final_cfg);
    result.test_crps_pct = result.test_report.mean_crps_pct;
    return result;
}

// ---------------------------------------------------------------------------
// file-based commands

namespace {

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

void ensure_out_dir(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
}

void write_quantiles_csv(const std::string& path, const std::vector<ForecastRecord>& records,
                         std::span<const double> series) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path);
    const double probs[4] = {0.025, 0.125, 0.875, 0.975};
    out << "t,target,q025,q125,q875,q975\n";
    for (const auto& rec : records) {
        out << rec.issue_time << ',' << rec.target_time;
        if (rec.kind == ForecastRecord::Kind::gln) {
            for (double prob : probs) out << ',' << format_double(gln_quantile(prob, rec.gln));
        } else {
            const auto members = rec.members.empty()
                                     ? reconstruct_ensemble(rec.ensemble_ref, series)
                                     : rec.members;
            for (double prob : probs) out << ',' << format_double(ensemble_quantile(members, prob));
        }
        out << '\n';
    }
}

}  // namespace

void write_report(const std::string& path, const EvalReport& report, const std::string& method) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path);
    out << "method = " << method << '\n';
    out << "n_scored = " << report.n_scored << '\n';
    out << "capacity = " << format_double(report.capacity) << '\n';
    out << "mean_crps_pct = " << format_double(report.mean_crps_pct) << '\n';
    out << "crps_sd_pct = " << format_double(report.crps_sd_pct) << '\n';
    for (const auto& [name, pct] : report.improvements_pct) {
        out << "improvement_vs_" << name << "_pct = " << format_double(pct) << '\n';
    }
}

double read_report_crps(const std::string& path) {
    const KeyValueConfig kv = KeyValueConfig::parse_file(path);
    const double v = kv.get_double("mean_crps_pct", std::numeric_limits<double>::quiet_NaN());
    if (!std::isfinite(v)) throw DataError("report has no mean_crps_pct: " + path);
    return v;
}

int cmd_simulate(const RunConfig& cfg) {
    return guard([&] {
        ensure_out_dir(cfg);
        for (int r = 0; r < cfg.replicas; ++r) {
            SyntheticConfig scfg;
            scfg.length = cfg.length;
            scfg.lambdas = cfg.lambdas;
            scfg.sigma2 = cfg.sigma2;
            scfg.nu = cfg.nu;
            scfg.bound = cfg.bound;
            scfg.seed = replica_seed(cfg.seed, static_cast<std::uint64_t>(r));
            scfg.delta = cfg.delta;
            const SyntheticTruth truth = generate(scfg);

            SeriesData data;
            data.has_b_true = true;
            data.x = truth.series;
            data.b_true = truth.bounds;
            data.t.resize(truth.series.size());
            for (std::size_t i = 0; i < data.t.size(); ++i) {
                data.t[i] = static_cast<std::int64_t>(i);
            }
            write_series_csv(cfg.out_dir + "/series_" + std::to_string(r) + ".csv", data);
        }
        return kExitOk;
    });
}

int cmd_track(const RunConfig& cfg) {
    return guard([&] {
        ensure_out_dir(cfg);
        if (cfg.data_path.empty()) throw ConfigError("track: --data is required");
        const SeriesData data = read_series_csv(cfg.data_path);
        const std::vector<double> x = coarsen_series(data.x, cfg);
        const TrackResult result = track_series(x, cfg);
        write_trajectory_csv(cfg.trajectory_path, result.records);
        if (result.diverged) {
            std::cerr << "numerical divergence detected at step " << result.diverged_at
                      << "; partial trajectory written\n";
            return kExitDivergence;
        }
        return kExitOk;
    });
}

int cmd_forecast(const RunConfig& cfg) {
    return guard([&] {
        ensure_out_dir(cfg);
        if (cfg.data_path.empty()) throw ConfigError("forecast: --data is required");
        const SeriesData data = read_series_csv(cfg.data_path);
        const std::vector<double> x = coarsen_series(data.x, cfg);
        std::vector<TrajectoryRecord> trajectory;
        if (is_gln_method(cfg.method) && cfg.method != "ideal") {
            trajectory = read_trajectory_csv(cfg.trajectory_path);
        }
        const auto records = forecast_series(data, x, trajectory, cfg);
        write_forecast_csv(cfg.forecast_path, records);
        write_quantiles_csv(cfg.out_dir + "/quantiles_" + cfg.method + ".csv", records, x);
        return kExitOk;
    });
}

int cmd_evaluate(const RunConfig& cfg) {
    return guard([&] {
        ensure_out_dir(cfg);
        if (cfg.data_path.empty()) throw ConfigError("evaluate: --data is required");
        const SeriesData data = read_series_csv(cfg.data_path);
        const std::vector<double> x = coarsen_series(data.x, cfg);
        const auto records = read_forecast_csv(cfg.forecast_path);
        const EvalReport report = evaluate_series(records, x, cfg);

        write_report(cfg.out_dir + "/report_" + cfg.method + ".txt", report, cfg.method);

        std::ofstream pit(cfg.out_dir + "/pit_" + cfg.method + ".csv");
        pit << "bin_lo,bin_hi,count\n";
        for (std::size_t i = 0; i < report.pit_counts.size(); ++i) {
            const double w = 1.0 / static_cast<double>(report.pit_counts.size());
            pit << format_double(static_cast<double>(i) * w) << ','
                << format_double(static_cast<double>(i + 1) * w) << ',' << report.pit_counts[i]
                << '\n';
        }

        std::ofstream marg(cfg.out_dir + "/marginal_" + cfg.method + ".csv");
        marg << "y,avg_forecast_cdf,empirical_cdf\n";
        for (std::size_t i = 0; i < report.marginal.grid.size(); ++i) {
            marg << format_double(report.marginal.grid[i]) << ','
                 << format_double(report.marginal.avg_forecast_cdf[i]) << ','
                 << format_double(report.marginal.empirical_cdf[i]) << '\n';
        }

        std::ofstream crps(cfg.out_dir + "/crps_" + cfg.method + ".csv");
        crps << "target,crps\n";
        for (const auto& [t, v] : report.per_time_crps) {
            crps << t << ',' << format_double(v) << '\n';
        }
        return kExitOk;
    });
}

int cmd_backtest(const RunConfig& cfg) {
    return guard([&] {
        ensure_out_dir(cfg);
        if (cfg.data_path.empty()) throw ConfigError("backtest: --data is required");
        const SeriesData data = read_series_csv(cfg.data_path);
        const BacktestResult result = backtest_series(data, cfg);

        const std::string dir = cfg.out_dir + "/backtest_" + cfg.method;
        std::filesystem::create_directories(dir);

        std::ofstream grid(dir + "/grid.csv");
        grid << "m,eta,alpha,val_crps_pct,diverged\n";
        for (const auto& cell : result.cells) {
            grid << cell.m << ',' << format_double(cell.eta) << ',' << format_double(cell.alpha)
                 << ',' << format_double(cell.val_crps_pct) << ',' << (cell.diverged ? 1 : 0)
                 << '\n';
        }

        std::ofstream chosen(dir + "/chosen.txt");
        chosen << "method = " << cfg.method << '\n';
        chosen << "m = " << result.winner.m << '\n';
        chosen << "eta = " << format_double(result.winner.eta) << '\n';
        chosen << "alpha = " << format_double(result.winner.alpha) << '\n';
        chosen << "validation_crps_pct = " << format_double(result.validation_crps_pct) << '\n';
        chosen << "test_crps_pct = " << format_double(result.test_crps_pct) << '\n';

        write_report(dir + "/report_test.txt", result.test_report, cfg.method);
        return kExitOk;
    });
}

}  // namespace bts
