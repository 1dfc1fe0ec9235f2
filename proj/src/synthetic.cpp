#include "bts/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bts/gln.hpp"
#include "bts/rng.hpp"

namespace bts {

double BoundCurve::at(std::int64_t t) const {
    switch (kind) {
        case Kind::constant:
            return base;
        case Kind::sinusoid:
            return base + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
        case Kind::piecewise: {
            double v = knots.front().second;
            for (const auto& [start, value] : knots) {
                if (t >= start) v = value;
            }
            return v;
        }
    }
    throw std::logic_error("BoundCurve: unknown kind");
}

void BoundCurve::validate() const {
    switch (kind) {
        case Kind::constant:
            if (!(base > 0.0)) throw std::invalid_argument("BoundCurve: constant must be > 0");
            return;
        case Kind::sinusoid:
            if (!(base > 0.0) || !(amplitude >= 0.0) || !(amplitude < base) || !(period > 0.0)) {
                throw std::invalid_argument(
                    "BoundCurve: sinusoid needs base > 0, 0 <= amplitude < base, period > 0");
            }
            return;
        case Kind::piecewise:
            if (knots.empty()) throw std::invalid_argument("BoundCurve: piecewise needs knots");
            for (std::size_t i = 0; i < knots.size(); ++i) {
                if (!(knots[i].second > 0.0)) {
                    throw std::invalid_argument("BoundCurve: piecewise values must be > 0");
                }
                if (i > 0 && knots[i].first <= knots[i - 1].first) {
                    throw std::invalid_argument("BoundCurve: piecewise knots must be increasing");
                }
            }
            return;
    }
    throw std::logic_error("BoundCurve: unknown kind");
}

BoundCurve BoundCurve::constant(double value) {
    BoundCurve c;
    c.kind = Kind::constant;
    c.base = value;
    c.validate();
    return c;
}

BoundCurve BoundCurve::sinusoid(double base, double amplitude, double period) {
    BoundCurve c;
    c.kind = Kind::sinusoid;
    c.base = base;
    c.amplitude = amplitude;
    c.period = period;
    c.validate();
    return c;
}

BoundCurve BoundCurve::piecewise(std::vector<std::pair<std::int64_t, double>> knots) {
    BoundCurve c;
    c.kind = Kind::piecewise;
    c.knots = std::move(knots);
    c.validate();
    return c;
}

BoundCurve BoundCurve::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ':')) parts.push_back(token);
    if (parts.empty()) throw std::invalid_argument("BoundCurve: empty descriptor");

    try {
        if (parts[0] == "constant" && parts.size() == 2) {
            return constant(std::stod(parts[1]));
        }
        if (parts[0] == "sinusoid" && parts.size() == 4) {
            return sinusoid(std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3]));
        }
        if (parts[0] == "piecewise" && parts.size() == 2) {
            std::vector<std::pair<std::int64_t, double>> knots;
            std::istringstream kin(parts[1]);
            std::string knot;
            while (std::getline(kin, knot, ',')) {
                const auto eq = knot.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("bad knot");
                knots.emplace_back(std::stoll(knot.substr(0, eq)), std::stod(knot.substr(eq + 1)));
            }
            return piecewise(std::move(knots));
        }
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("BoundCurve: cannot parse '" + text + "'");
    }
    throw std::invalid_argument("BoundCurve: cannot parse '" + text + "'");
}

std::string BoundCurve::str() const {
    std::ostringstream out;
    out.precision(17);
    switch (kind) {
        case Kind::constant:
            out << "constant:" << base;
            break;
        case Kind::sinusoid:
            out << "sinusoid:" << base << ':' << amplitude << ':' << period;
            break;
        case Kind::piecewise: {
            out << "piecewise:";
            for (std::size_t i = 0; i < knots.size(); ++i) {
                if (i) out << ',';
                out << knots[i].first << '=' << knots[i].second;
            }
            break;
        }
    }
    return out.str();
}

void SyntheticConfig::validate() const {
    bound.validate();
    if (length < order() + 1) throw std::invalid_argument("SyntheticConfig: series too short");
    if (lambdas.empty()) throw std::invalid_argument("SyntheticConfig: need at least one lambda");
    if (!(sigma2 > 0.0) || !(nu > 0.0) || !(delta > 0.0)) {
        throw std::invalid_argument("SyntheticConfig: sigma2, nu, delta must be > 0");
    }
    for (std::int64_t t = 0; t < std::min<std::int64_t>(length, 20000); ++t) {
        if (!(bound.at(t) > 2.0 * delta)) {
            throw std::invalid_argument("SyntheticConfig: bound must stay above 2*delta");
        }
    }
}

double bound_at(std::int64_t t, const BoundCurve& curve) {
    if (t < 0) throw std::invalid_argument("bound_at: t must be >= 0");
    return curve.at(t);
}

SyntheticTruth generate(const SyntheticConfig& config) {
    config.validate();
    const int p = config.order();
    const double sd = std::sqrt(config.sigma2);

    SyntheticTruth truth;
    truth.series.resize(config.length);
    truth.bounds.resize(config.length);
    truth.lambdas = config.lambdas;
    truth.sigma2 = config.sigma2;
    truth.nu = config.nu;

    RandomStream rng(config.seed);
    for (std::int64_t t = 0; t < config.length; ++t) {
        const double b_t = config.bound.at(t);
        truth.bounds[t] = b_t;

        double mu = 0.0;
        if (t >= p) {
            for (int k = 1; k <= p; ++k) {
                const double lag = std::min(truth.series[t - k], b_t - config.delta);
                mu += config.lambdas[k - 1] * logit_transform(lag / b_t, config.nu);
            }
        }
        const double y = rng.normal(mu, sd);
        truth.series[t] = b_t * inverse_transform(y, config.nu);
    }
    return truth;
}

}  // namespace bts
