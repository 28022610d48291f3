#include "bbmlab/core/regime.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/minima.hpp>
#include <spdlog/spdlog.h>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

std::string_view to_string(Regime regime) noexcept {
    switch (regime) {
        case Regime::High: return "high";
        case Regime::Critical: return "critical";
        case Regime::Low: return "low";
        case Regime::Trivial: return "trivial";
    }
    return "unknown";
}

RegimeParams classify_regime(double alpha) {
    if (!std::isfinite(alpha)) {
        fail(ErrorKind::InvalidInput, "alpha must be finite");
    }
    RegimeParams p;
    p.alpha = alpha;
    p.gamma = kGamma;
    p.lambda_alpha = std::clamp((1.0 - alpha) / kSqrt2, 0.0, 1.0);

    const double gap = alpha + kGamma;
    if (gap == 0.0 || std::abs(gap) <= kCriticalSnap) {
        p.regime = Regime::Critical;
        if (gap != 0.0) {
            p.snapped_to_critical = true;
            spdlog::warn("alpha = {:.17g} is within {:g} of -gamma; classified as critical", alpha,
                         kCriticalSnap);
        }
    } else if (alpha >= 1.0) {
        p.regime = Regime::Trivial;
    } else if (alpha > -kGamma) {
        p.regime = Regime::High;
        p.v_alpha = (kGamma + alpha) / kSqrt2;
    } else {
        p.regime = Regime::Low;
    }
    return p;
}

double bramson_centering(double t) {
    if (!(t > 0.0)) {
        fail(ErrorKind::Domain, "bramson_centering needs t > 0, got " + std::to_string(t));
    }
    return kSqrt2 * t - 3.0 / (2.0 * kSqrt2) * std::log(t);
}

double rate_function(double alpha) {
    if (!std::isfinite(alpha)) {
        fail(ErrorKind::InvalidInput, "alpha must be finite");
    }
    if (alpha >= 1.0) return 0.0;
    if (alpha >= -kGamma) return -2.0 * kGamma * (1.0 - alpha);
    return -(1.0 + alpha * alpha);
}

double g_profile(double alpha, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        fail(ErrorKind::Domain, "g_profile needs u in (0,1), got " + std::to_string(u));
    }
    const double d = alpha - u;
    return (1.0 - u) + d * d / (1.0 - u);
}

GMinimum g_argmin(double alpha) {
    const RegimeParams p = classify_regime(alpha);
    if (p.regime != Regime::High) {
        fail(ErrorKind::Regime, "g_argmin is defined for -gamma < alpha < 1 only");
    }
    auto g = [alpha](double u) { return g_profile(alpha, u); };
    auto [u, val] = boost::math::tools::brent_find_minima(g, 1e-12, 1.0 - 1e-12, 52);
    // Brent stalls near sqrt(eps); finish with Newton steps on g'.
    // g'(u) = -1 + (d^2 - 2 d w) / w^2, g''(u) = 2 (1 - alpha)^2 / w^3 with d = alpha - u, w = 1 - u.
    for (int i = 0; i < 4; ++i) {
        const double d = alpha - u;
        const double w = 1.0 - u;
        const double g1 = -1.0 + (d * d - 2.0 * d * w) / (w * w);
        const double g2 = 2.0 * (1.0 - alpha) * (1.0 - alpha) / (w * w * w);
        const double next = u - g1 / g2;
        if (!(next > 0.0 && next < 1.0)) break;
        u = next;
    }
    val = g(u);
    return {u, val};
}

}  // namespace bbm
