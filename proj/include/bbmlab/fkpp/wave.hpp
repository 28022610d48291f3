#pragma once

#include <optional>
#include <vector>

#include "bbmlab/fkpp/field.hpp"

namespace bbm {

/// Travelling-wave profile w(z), median-centred so that w(0) = 1/2.
struct WaveProfile {
    std::vector<double> z;
    std::vector<double> w;
    /// log w; carries 1 - w where w rounds to 1.
    std::vector<double> logw;
    /// Least-squares slope of log w on the left fit window.
    double left_slope = 0.0;
    double left_fit_lo = -8.0;
    double left_fit_hi = -4.0;
    double t_source = 0.0;
    /// Estimated limit of (median position - m_t); the Bramson-frame wave is w(z - bramson_offset).
    /// Absent when the source field has too little history for the fit.
    std::optional<double> bramson_offset;

    double log_at(double x) const;
    double at(double x) const;
};

struct WaveOptions {
    double left_fit_lo = -8.0;
    double left_fit_hi = -4.0;
    /// Front history window, as fractions of t, used for the offset fit.
    double history_from = 0.5;
    /// Minimum number of stored slices in the history window.
    std::size_t history_min_slices = 8;
};

/// Slices u(., t) out of a Heaviside-started field and recentres it at the median.
/// Throws Coverage when the front or the level band (0.01, 0.99) leaves the window.
WaveProfile extract_wave(const SolutionField& field, double t, const WaveOptions& options = {});

/// Residual of 1/2 w'' + sqrt2 w' - w (1 - w) by central differences with step h, sup over [lo, hi].
/// This is the wave equation written for the distribution function w (w = 0 at -inf, 1 at +inf).
double wave_ode_residual(const WaveProfile& wave, double lo, double hi, double h);

/// Level set z(t) of u(., t) = level.
class FrontTrack {
public:
    FrontTrack(const SolutionField& field, double level);
    /// Throws Coverage when t is outside the stored range or the level leaves the window.
    double operator()(double t) const;
    double level() const { return level_; }

private:
    const SolutionField* field_;
    double level_;
    double log_level_;
    double on_slice(std::size_t k) const;
};

FrontTrack front_position(const SolutionField& field, double level);

/// Fit of c + k/t to (front(t) - m_t) + 3 sqrt(pi/2)/sqrt(t) - b log(t)/t over the stored slices in
/// [t_lo, t_hi]; b = 9 (5 - 6 log 2) / (8 sqrt2). The two subtracted terms are the universal
/// relaxation of a pulled front from steep initial data; c estimates lim (front - m_t).
struct OffsetFit {
    double offset = 0.0;
    double k = 0.0;
    double rms = 0.0;
    std::size_t points = 0;
};
OffsetFit bramson_offset_fit(const SolutionField& field, double t_lo, double t_hi);

}  // namespace bbm
