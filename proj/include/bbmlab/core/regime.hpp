#pragma once

#include <optional>
#include <string_view>

namespace bbm {

enum class Regime { High, Critical, Low, Trivial };

std::string_view to_string(Regime regime) noexcept;

/// Drift parameter alpha of the event {M_t <= sqrt2 alpha t} with its derived quantities.
struct RegimeParams {
    double alpha = 0.0;
    double gamma = 0.0;
    /// (gamma + alpha)/sqrt2, present only for -gamma < alpha < 1.
    std::optional<double> v_alpha;
    /// (1 - alpha)/sqrt2 clipped to [0, 1].
    double lambda_alpha = 0.0;
    Regime regime = Regime::High;
    /// True when alpha was within kCriticalSnap of -gamma but not equal to it.
    bool snapped_to_critical = false;
};

RegimeParams classify_regime(double alpha);

/// Bramson centering m_t = sqrt2 t - 3/(2 sqrt2) log t.
double bramson_centering(double t);

/// Large-deviation rate psi(alpha) = lim (1/t) log P(M_t <= sqrt2 alpha t); non-positive.
double rate_function(double alpha);

/// g_alpha(u) = (1 - u) + (alpha - u)^2 / (1 - u) on (0, 1).
double g_profile(double alpha, double u);

struct GMinimum {
    double argmin = 0.0;
    double value = 0.0;
};

/// Numerical minimiser of g_alpha over (0, 1); defined on the High regime only.
GMinimum g_argmin(double alpha);

}  // namespace bbm
