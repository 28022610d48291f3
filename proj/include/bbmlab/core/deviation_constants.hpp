#pragma once

#include "bbmlab/fkpp/field.hpp"
#include "bbmlab/fkpp/wave.hpp"

namespace bbm {

struct PhiOptions {
    /// Upper end of the s integral; 0 means the last stored slice.
    double s_max = 0.0;
    /// Coverage error when the truncation estimate exceeds this fraction of -1/alpha.
    double max_truncation = 1e-3;
};

struct PhiResult {
    double value = 0.0;
    /// sqrt2 times the double integral.
    double integral_term = 0.0;
    /// Estimated mass discarded by the s and y truncations (absolute, same units as value).
    double truncation = 0.0;
    double s_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
    /// Decay rate of the s integrand fitted on the last stretch, used for the s tail.
    double tail_rate = 0.0;
};

/// Phi(alpha) = -1/alpha + sqrt2 int_0^inf ds int dy exp((1 - alpha^2) s + sqrt2 alpha y) u(y, s)^2.
/// y integral: log-domain trapezoid on each stored slice, the region right of the window counted with
/// u = 1, the region left of it bounded with u <= P(B_s <= y). s integral: trapezoid, with the first
/// interval integrated as a + b sqrt(s) (the integrand has a sqrt(s) cusp at 0), and an exponential
/// tail beyond s_max.
PhiResult phi_alpha(double alpha, const SolutionField& field, const PhiOptions& options = {});

struct C1Options {
    /// Integrate in the Bramson frame, w_B(z) = w(z - bramson_offset). Needs the offset on the wave.
    bool bramson_frame = true;
    /// Analytic extensions beyond the abscissae: w ~ C e^{sqrt2 gamma z} on the left, w = 1 on the right.
    bool tail_corrections = true;
    /// Coverage error unless the integrand at both ends is below this fraction of its maximum.
    double end_decay = 1e-6;
    /// Coverage error when the tail corrections exceed this fraction of the total.
    double tail_budget = 5e-3;
};

struct C1Result {
    double value = 0.0;
    double left_tail = 0.0;
    double right_tail = 0.0;
    double frame_shift = 0.0;
};

/// C1 = 1/2 int exp(-sqrt2 gamma z) w(z)^2 dz.
C1Result c1_from_wave(const WaveProfile& wave, const C1Options& options = {});

/// C2 = C1 Gamma(q) / (sqrt(2 pi) 2^q), q = (3 sqrt2 - 1)/4.
double c2_from_c1(double c1);

}  // namespace bbm
