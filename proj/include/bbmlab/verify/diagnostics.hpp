#pragma once

#include <span>
#include <string>
#include <vector>

#include "bbmlab/fkpp/field.hpp"
#include "bbmlab/verify/report.hpp"
#include "bbmlab/verify/tolerances.hpp"

namespace bbm::verify {

struct Band {
    double lo = 0.5;
    double hi = 2.0;
};

/// R(t) at each requested time plus the judged reports: band membership of the last R, strictly
/// shrinking |R(t_i)/R(t_{i-1}) - 1|, and the exponent of u over the last two times.
struct RatioSeries {
    std::vector<double> times;
    std::vector<double> log_u;
    std::vector<double> ratios;
    double exponent = 0.0;
    std::vector<ComparisonReport> reports;
};

/// Least-squares slope of -log u(sqrt2 alpha t, t) in t over the stored slices in [t_lo, t_hi].
double exponent_slope(const SolutionField& field, double alpha, double t_lo, double t_hi);

/// R(t) = u(sqrt2 alpha t, t) e^{2 gamma (1 - alpha) t} / (c1 (v_alpha t)^{3 gamma / 2}), -gamma < alpha < 1.
RatioSeries ratio_diagnostic_high(const SolutionField& field, double alpha, double c1, std::span<const double> times,
                                  Band band = {}, const Tolerances& tol = default_tolerances());

/// R(t) = u(sqrt2 alpha t, t) sqrt(4 pi t) e^{(1 + alpha^2) t} / phi, alpha < -gamma. Adds a trend
/// report: |R - 1| strictly decreasing over the last two times.
RatioSeries ratio_diagnostic_low(const SolutionField& field, double alpha, double phi, std::span<const double> times,
                                 Band band = {}, const Tolerances& tol = default_tolerances());

/// R(t) = u(-sqrt2 gamma t, t) e^{(1 + gamma^2) t} / (c2 t^{3 gamma / 4}). Adds the near-critical
/// check at the last time with a_t = t^{1/4}.
RatioSeries ratio_diagnostic_critical(const SolutionField& field, double c2, std::span<const double> times,
                                      Band band = {}, const Tolerances& tol = default_tolerances());

/// u(m_t - a, t) / (c1 e^{-sqrt2 gamma a}) per a, judged against the moderate band for a > 0
/// (a = 0 is reported unjudged), and the least-squares log-slope over the positive a values.
/// Throws Regime for a > t/4.
std::vector<ComparisonReport> moderate_deviation_check(const SolutionField& field, double c1, double t,
                                                       std::span<const double> a_values,
                                                       const Tolerances& tol = default_tolerances());

struct CriticalProfile {
    /// (t - s)/sqrt(t) for the stored s < t, ascending.
    std::vector<double> x;
    /// Normalized first-branch s-marginal at alpha = -gamma in the x variable.
    std::vector<double> density;
    /// Normalized u^{3 gamma/2} e^{-2u^2} on the same abscissae.
    std::vector<double> limit;
    ComparisonReport report;
};

/// L1 distance between the two curves of CriticalProfile at time t, judged against critical_l1.
CriticalProfile critical_profile_check(const SolutionField& field, double t, const Tolerances& tol = default_tolerances());

struct BoundAuditOptions {
    std::vector<double> gaussian_times{5.0, 20.0, 40.0};
    double gaussian_z_lo = -20.0;
    double gaussian_z_hi = -1.0;
    std::vector<double> ds_times{20.0, 30.0, 40.0};
    double ds_a_lo = -3.0;
    double ds_a_hi = 0.9;
    /// Split point beta >= 1 of the piecewise bound.
    double ds_beta = 1.0;
    std::vector<double> ch_times{20.0, 40.0};
    double ch_z_lo = 5.0;
    double ch_z_hi = 20.0;
    double step = 0.01;
};

/// Violation counts (expected zero) of the Gaussian upper bound on u, the Mills-ratio sandwich, the
/// piecewise large-deviation bound with slack epsilon, and the moderate-deviation bound with a
/// constant fitted at the first time, widened by the stability band, and its stability across times.
std::vector<ComparisonReport> bound_audit(const SolutionField& field, const BoundAuditOptions& options = {},
                                          const Tolerances& tol = default_tolerances());

/// Right-hand side of the piecewise large-deviation bound, as log u.
double ds_log_bound(double a, double t, double epsilon, double beta);

/// Short grid description for report metadata.
std::string describe_grid(const SolutionField& field);

}  // namespace bbm::verify
