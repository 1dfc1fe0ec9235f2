#include "bts/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bts {

ProjectedParams project_theta(const ParamVector& theta_hat, std::span<const double> recent,
                              double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("project_theta: delta must be > 0");
    if (static_cast<int>(recent.size()) != theta_hat.order()) {
        throw std::invalid_argument("project_theta: need exactly p recent observations");
    }
    ProjectedParams out{theta_hat, delta};
    const double m = *std::max_element(recent.begin(), recent.end());
    if (m >= theta_hat.b()) out.theta_tilde.b() = m + delta;
    return out;
}

GlnForecast predictive_distribution(const ProjectedParams& projected,
                                    std::span<const double> recent) {
    const ParamVector& th = projected.theta_tilde;
    std::vector<double> lambdas(th.order());
    for (int k = 0; k < th.order(); ++k) lambdas[k] = th.lambda(k);
    GlnForecast f;
    f.mu = conditional_mean_mu(recent, lambdas, th.nu(), th.b());
    f.sigma2 = th.sigma2();
    f.nu = th.nu();
    f.b = th.b();
    return f;
}

std::vector<double> climatology_forecast(std::span<const double> history, std::size_t cap) {
    if (history.empty()) throw std::invalid_argument("climatology_forecast: empty history");
    if (cap == 0) throw std::invalid_argument("climatology_forecast: cap must be >= 1");
    std::vector<double> members;
    if (history.size() <= cap) {
        members.assign(history.begin(), history.end());
    } else {
        members.resize(cap);
        for (std::size_t i = 0; i < cap; ++i) {
            members[i] = history[i * history.size() / cap];
        }
    }
    std::sort(members.begin(), members.end());
    return members;
}

std::vector<double> persistence_forecast(std::span<const double> history, int n_err,
                                         double clip_lo, double clip_hi) {
    if (n_err < 1) throw std::invalid_argument("persistence_forecast: n_err must be >= 1");
    if (history.size() <= static_cast<std::size_t>(n_err)) {
        throw std::invalid_argument("persistence_forecast: need more than n_err observations");
    }
    const double x_t = history.back();
    std::vector<double> members(n_err);
    const std::size_t n = history.size();
    for (int i = 0; i < n_err; ++i) {
        const double err = history[n - 1 - i] - history[n - 2 - i];
        members[i] = std::clamp(x_t + err, clip_lo, clip_hi);
    }
    std::sort(members.begin(), members.end());
    return members;
}

std::string make_climatology_ref(std::int64_t first, std::int64_t last, std::size_t cap) {
    std::ostringstream out;
    out << "clim:" << first << ':' << last << ':' << cap;
    return out.str();
}

std::string make_persistence_ref(std::int64_t t, int n_err, double clip_lo, double clip_hi) {
    std::ostringstream out;
    out.precision(17);
    out << "persist:" << t << ':' << n_err << ':' << clip_lo << ':' << clip_hi;
    return out.str();
}

std::vector<double> reconstruct_ensemble(const std::string& ref, std::span<const double> series) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(ref);
    while (std::getline(in, token, ':')) parts.push_back(token);

    try {
        if (parts.size() == 4 && parts[0] == "clim") {
            const std::int64_t first = std::stoll(parts[1]);
            const std::int64_t last = std::stoll(parts[2]);
            const std::size_t cap = static_cast<std::size_t>(std::stoull(parts[3]));
            if (first < 0 || last < first || last >= static_cast<std::int64_t>(series.size())) {
                throw std::invalid_argument("range");
            }
            return climatology_forecast(series.subspan(first, last - first + 1), cap);
        }
        if (parts.size() == 5 && parts[0] == "persist") {
            const std::int64_t t = std::stoll(parts[1]);
            const int n_err = std::stoi(parts[2]);
            const double clip_lo = std::stod(parts[3]);
            const double clip_hi = std::stod(parts[4]);
            if (t < 0 || t >= static_cast<std::int64_t>(series.size())) {
                throw std::invalid_argument("range");
            }
            return persistence_forecast(series.subspan(0, t + 1), n_err, clip_lo, clip_hi);
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("reconstruct_ensemble: bad reference '" + ref + "'");
    }
    throw std::invalid_argument("reconstruct_ensemble: bad reference '" + ref + "'");
}

}  // namespace bts
