#pragma once

#include <optional>

#include "bbmlab/core/regime.hpp"

namespace bbm {

/// Multiplicative constants of the lower-deviation asymptotics; each regime needs one of them.
struct DeviationConstants {
    std::optional<double> c1;   ///< High regime and moderate deviations.
    std::optional<double> c2;   ///< Critical regime and its o(sqrt t) neighbourhood.
    std::optional<double> phi;  ///< Low regime, Phi(alpha) for the same alpha.
};

/// constant * t^poly_exponent * exp(exp_rate * t).
struct AsymptoticPrediction {
    Regime regime = Regime::High;
    double exp_rate = 0.0;
    double poly_exponent = 0.0;
    double constant = 0.0;
    /// Time-independent factor folded into the power law (v_alpha^{3 gamma/2} for the high regime).
    double scale = 1.0;

    double log_evaluate(double t) const;
    double evaluate(double t) const;

    /// Smallest t >= 1 beyond which evaluate(t) stays in (0, 1).
    double validity_floor() const;
};

/// Regime-matched asymptotic for P(M_t <= sqrt2 alpha t).
AsymptoticPrediction predict_probability(const RegimeParams& params, const DeviationConstants& constants);

/// Moderate deviations: P(M_t <= m_t - a) ~ C1 exp(-sqrt2 gamma a).
double predict_moderate(double c1, double a);

/// o(sqrt t) window around the critical point:
/// P(M_t <= -sqrt2 gamma t + a_t) ~ C2 t^{3 gamma/4} exp(-2 sqrt2 gamma t + sqrt2 gamma a_t).
double predict_near_critical(double c2, double t, double a_t);

}  // namespace bbm
