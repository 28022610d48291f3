#include "bbmlab/core/prediction.hpp"

#include <cmath>
#include <string>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

double AsymptoticPrediction::log_evaluate(double t) const {
    if (!(t > 1.0)) {
        fail(ErrorKind::Domain, "asymptotic predictions need t > 1, got " + std::to_string(t));
    }
    return std::log(constant * scale) + poly_exponent * std::log(t) + exp_rate * t;
}

double AsymptoticPrediction::evaluate(double t) const { return std::exp(log_evaluate(t)); }

double AsymptoticPrediction::validity_floor() const {
    auto f = [this](double t) {
        return std::log(constant * scale) + poly_exponent * std::log(t) + exp_rate * t;
    };
    // log f is concave in t: increasing up to -p/r, then decreasing to -inf.
    double peak = 1.0;
    if (poly_exponent > 0.0) peak = std::max(1.0, -poly_exponent / exp_rate);
    if (f(peak) < 0.0) return 1.0;
    double lo = peak;
    double hi = 2.0 * peak + 1.0;
    while (f(hi) >= 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.0 ? lo : hi) = mid;
    }
    return hi;
}

namespace {
double require(const std::optional<double>& c, const char* name) {
    if (!c) {
        fail(ErrorKind::Configuration, std::string("prediction needs constant ") + name);
    }
    if (!(*c > 0.0)) {
        fail(ErrorKind::Domain, std::string(name) + " must be positive");
    }
    return *c;
}
}  // namespace

AsymptoticPrediction predict_probability(const RegimeParams& params, const DeviationConstants& constants) {
    AsymptoticPrediction p;
    p.regime = params.regime;
    const double a = params.alpha;
    switch (params.regime) {
        case Regime::High:
            p.constant = require(constants.c1, "C1");
            p.scale = std::pow(*params.v_alpha, kHighPolyExponent);
            p.poly_exponent = kHighPolyExponent;
            p.exp_rate = -2.0 * kGamma * (1.0 - a);
            break;
        case Regime::Low:
            p.constant = require(constants.phi, "Phi(alpha)");
            p.scale = 1.0 / std::sqrt(4.0 * kPi);
            p.poly_exponent = kLowPolyExponent;
            p.exp_rate = -(1.0 + a * a);
            break;
        case Regime::Critical:
            p.constant = require(constants.c2, "C2");
            p.poly_exponent = kCriticalPolyExponent;
            p.exp_rate = -(1.0 + kGamma * kGamma);
            break;
        case Regime::Trivial:
            fail(ErrorKind::Unsupported, "alpha >= 1 is not a lower deviation");
    }
    return p;
}

double predict_moderate(double c1, double a) {
    if (!(c1 > 0.0)) fail(ErrorKind::Domain, "C1 must be positive");
    return c1 * std::exp(-kWaveLeftSlope * a);
}

double predict_near_critical(double c2, double t, double a_t) {
    if (!(c2 > 0.0)) fail(ErrorKind::Domain, "C2 must be positive");
    if (!(t > 1.0)) fail(ErrorKind::Domain, "near-critical prediction needs t > 1");
    return c2 * std::pow(t, kCriticalPolyExponent) *
           std::exp(-2.0 * kSqrt2 * kGamma * t + kWaveLeftSlope * a_t);
}

}  // namespace bbm
