#include "bbmlab/fkpp/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/regime.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

namespace {

double crossing(std::span<const double> row, double log_level, double origin, double dz, bool& found) {
    found = false;
    for (std::size_t i = 1; i < row.size(); ++i) {
        if (row[i] >= log_level && row[i - 1] < log_level) {
            found = true;
            const double a = row[i - 1];
            const double b = row[i];
            const double f = std::isfinite(a) ? (log_level - a) / (b - a) : 1.0;
            return origin + (static_cast<double>(i - 1) + f) * dz;
        }
    }
    return 0.0;
}

}  // namespace

double WaveProfile::log_at(double x) const {
    if (z.empty() || x < z.front() || x > z.back()) {
        fail(ErrorKind::Coverage, "wave evaluated outside its abscissae");
    }
    auto it = std::upper_bound(z.begin(), z.end(), x);
    std::size_t i = static_cast<std::size_t>(it - z.begin());
    if (i == 0) i = 1;
    if (i >= z.size()) i = z.size() - 1;
    const double f = (x - z[i - 1]) / (z[i] - z[i - 1]);
    return logw[i - 1] + f * (logw[i] - logw[i - 1]);
}

double WaveProfile::at(double x) const { return std::exp(log_at(x)); }

WaveProfile extract_wave(const SolutionField& field, double t, const WaveOptions& options) {
    const std::size_t k = field.find_slice(t);
    if (k == SolutionField::npos) fail(ErrorKind::Coverage, "extract_wave needs a stored slice at t");
    const auto row = field.logu(k);
    bool found = false;
    const double median = crossing(row, -std::numbers::ln2, field.origin(k), field.grid().dz, found);
    if (!found) fail(ErrorKind::Coverage, "median of u(., t) is not inside the window");

    WaveProfile wave;
    wave.t_source = t;
    wave.left_fit_lo = options.left_fit_lo;
    wave.left_fit_hi = options.left_fit_hi;
    double last = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < field.nodes(); ++i) {
        const double l = row[i];
        if (!std::isfinite(l) || l >= 0.0 || !(l > last)) continue;  // strictly increasing, below 1
        wave.z.push_back(field.z_at(k, i) - median);
        wave.w.push_back(std::exp(l));
        wave.logw.push_back(l);
        last = l;
    }
    if (wave.w.size() < 8 || wave.w.front() >= 0.01 || wave.w.back() <= 0.99) {
        fail(ErrorKind::Coverage, "window does not contain the band 0.01 < w < 0.99");
    }

    // Left slope by least squares on [lo, hi].
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < wave.z.size(); ++i) {
        const double x = wave.z[i];
        if (x < options.left_fit_lo || x > options.left_fit_hi) continue;
        const double y = wave.logw[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 3) fail(ErrorKind::Coverage, "left fit window holds fewer than 3 nodes");
    const double dm = static_cast<double>(m);
    wave.left_slope = (dm * sxy - sx * sy) / (dm * sxx - sx * sx);

    std::size_t history = 0;
    const double t_lo = options.history_from * t;
    for (std::size_t j = 0; j < field.slices(); ++j) {
        if (field.time(j) >= t_lo && field.time(j) <= t) ++history;
    }
    if (history >= options.history_min_slices && t_lo > 1.0) {
        wave.bramson_offset = bramson_offset_fit(field, t_lo, t).offset;
    }
    return wave;
}

double wave_ode_residual(const WaveProfile& wave, double lo, double hi, double h) {
    double worst = 0.0;
    const std::size_t steps = static_cast<std::size_t>(std::llround((hi - lo) / h));
    for (std::size_t i = 0; i <= steps; ++i) {
        const double x = lo + static_cast<double>(i) * h;
        const double wm = wave.at(x - h);
        const double w0 = wave.at(x);
        const double wp = wave.at(x + h);
        const double d1 = (wp - wm) / (2.0 * h);
        const double d2 = (wp - 2.0 * w0 + wm) / (h * h);
        worst = std::max(worst, std::abs(0.5 * d2 + kSqrt2 * d1 - w0 * (1.0 - w0)));
    }
    return worst;
}

FrontTrack::FrontTrack(const SolutionField& field, double level)
    : field_(&field), level_(level), log_level_(std::log(level)) {
    if (!(level > 0.0 && level < 1.0)) fail(ErrorKind::InvalidInput, "front level must lie in (0, 1)");
}

double FrontTrack::on_slice(std::size_t k) const {
    bool found = false;
    const double z = crossing(field_->logu(k), log_level_, field_->origin(k), field_->grid().dz, found);
    if (!found) {
        std::ostringstream why;
        why << "level " << level_ << " is outside the window at t = " << field_->time(k);
        fail(ErrorKind::Coverage, why.str());
    }
    return z;
}

double FrontTrack::operator()(double t) const {
    const auto times = field_->times();
    if (times.empty() || t < times.front() - 1e-12 || t > times.back() + 1e-12) {
        fail(ErrorKind::Coverage, "front requested outside the stored time range");
    }
    if (const std::size_t k = field_->find_slice(t); k != SolutionField::npos) return on_slice(k);
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k1 = static_cast<std::size_t>(it - times.begin());
    const std::size_t k0 = k1 - 1;
    const double f = (t - times[k0]) / (times[k1] - times[k0]);
    return on_slice(k0) + f * (on_slice(k1) - on_slice(k0));
}

FrontTrack front_position(const SolutionField& field, double level) { return FrontTrack(field, level); }

OffsetFit bramson_offset_fit(const SolutionField& field, double t_lo, double t_hi) {
    if (!(t_lo > 0.0 && t_hi > t_lo)) fail(ErrorKind::InvalidInput, "offset fit needs 0 < t_lo < t_hi");
    const FrontTrack front(field, 0.5);
    const double evs = 3.0 * std::sqrt(kPi / 2.0);
    const double b = 9.0 * (5.0 - 6.0 * std::numbers::ln2) / (8.0 * kSqrt2);
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < field.slices(); ++k) {
        const double t = field.time(k);
        if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
        xs.push_back(1.0 / t);
        ys.push_back(front(t) - bramson_centering(t) + evs / std::sqrt(t) - b * std::log(t) / t);
    }
    if (xs.size() < 3) fail(ErrorKind::Coverage, "offset fit needs at least 3 stored slices");
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    OffsetFit fit;
    fit.k = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.offset = (sy - fit.k * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - fit.offset - fit.k * xs[i];
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    fit.points = xs.size();
    return fit;
}

}  // namespace bbm
