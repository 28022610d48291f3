#include "bbmlab/core/deviation_constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/core/quadrature.hpp"
#include "bbmlab/core/regime.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log of int_{-inf}^{y0} exp(c y) P(B_s <= y)^2 dy, bounded through P(B_s <= y) <= sqrt(s) phi(y/sqrt s)/|y|.
double log_left_bound(double c, double s, double y0) {
    if (y0 >= 0.0) return 0.0;
    const double h = std::min(0.05, 0.1 * std::sqrt(s));
    std::vector<double> v;
    for (double y = y0; y > y0 - 40.0 * std::sqrt(s) - 10.0; y -= h) {
        const double lp = std::log(std::sqrt(s) / (-y)) - 0.5 * std::log(2.0 * kPi) - 0.5 * y * y / s;
        v.push_back(c * y + 2.0 * std::min(lp, 0.0));
    }
    return log_trapezoid_uniform(v, h);
}

}  // namespace

PhiResult phi_alpha(double alpha, const SolutionField& field, const PhiOptions& options) {
    if (!std::isfinite(alpha)) fail(ErrorKind::InvalidInput, "alpha must be finite");
    if (!(alpha < -kGamma)) fail(ErrorKind::Regime, "Phi(alpha) is defined for alpha < -gamma only");
    if (field.slices() < 4 || field.time(0) != 0.0) fail(ErrorKind::Coverage, "Phi needs a field stored from t = 0");
    const double s_max = options.s_max > 0.0 ? options.s_max : field.times().back();
    if (s_max > field.times().back() + 1e-9) fail(ErrorKind::Coverage, "field does not reach s_max");

    const double c = kSqrt2 * alpha;
    const double growth = 1.0 - alpha * alpha;
    const double dz = field.grid().dz;

    PhiResult r;
    r.s_max = s_max;
    std::vector<double> s_grid;
    std::vector<double> log_j;
    double worst_left = kNegInf;
    r.y_min = std::numeric_limits<double>::infinity();
    r.y_max = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    for (std::size_t k = 0; k < field.slices() && field.time(k) <= s_max + 1e-12; ++k) {
        const double s = field.time(k);
        const auto row = field.logu(k);
        terms.assign(row.size(), kNegInf);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i] != kNegInf) terms[i] = c * field.z_at(k, i) + 2.0 * row[i];
        }
        double lj = log_trapezoid_uniform(terms, dz);
        // Right of the window u = 1 to within the window's own tolerance.
        const double right = c * field.z_hi(k) - std::log(-c);
        lj = std::max(lj, right) + std::log1p(std::exp(-std::abs(lj - right)));
        s_grid.push_back(s);
        log_j.push_back(growth * s + lj);
        if (s > 0.0) worst_left = std::max(worst_left, growth * s + log_left_bound(c, s, field.z_lo(k)));
        r.y_min = std::min(r.y_min, field.z_lo(k));
        r.y_max = std::max(r.y_max, field.z_hi(k));
    }
    if (s_grid.size() < 4) fail(ErrorKind::Coverage, "Phi needs at least 4 stored slices below s_max");

    double integral = 0.0;
    {
        // First interval: a + b sqrt(s).
        const double h = s_grid[1];
        const double a = std::exp(log_j[0]);
        const double b = (std::exp(log_j[1]) - a) / std::sqrt(h);
        integral += a * h + (2.0 / 3.0) * b * h * std::sqrt(h);
    }
    for (std::size_t i = 2; i < s_grid.size(); ++i) {
        integral += 0.5 * (s_grid[i] - s_grid[i - 1]) * (std::exp(log_j[i]) + std::exp(log_j[i - 1]));
    }

    // Exponential tail from the decay over the last quarter of the s range.
    const std::size_t n = s_grid.size();
    std::size_t q = n - 1;
    while (q > 0 && s_grid[q] > 0.75 * s_grid[n - 1]) --q;
    r.tail_rate = (log_j[q] - log_j[n - 1]) / (s_grid[n - 1] - s_grid[q]);
    if (!(r.tail_rate > 0.0)) fail(ErrorKind::Coverage, "s integrand is not decaying at s_max; extend the field");
    const double s_tail = std::exp(log_j[n - 1]) / r.tail_rate;
    // Left truncation: a bound on each slice, times the s range.
    const double y_tail = std::exp(worst_left) * s_max;

    r.integral_term = kSqrt2 * (integral + s_tail);
    r.value = -1.0 / alpha + r.integral_term;
    r.truncation = kSqrt2 * (s_tail + y_tail);
    if (r.truncation > options.max_truncation * (-1.0 / alpha)) {
        std::ostringstream why;
        why << "Phi truncation estimate " << r.truncation << " exceeds the budget; widen the window or extend s";
        fail(ErrorKind::Coverage, why.str());
    }
    return r;
}

C1Result c1_from_wave(const WaveProfile& wave, const C1Options& options) {
    if (wave.z.size() < 2 || wave.z.size() != wave.logw.size()) fail(ErrorKind::InvalidInput, "malformed wave");
    C1Result r;
    if (options.bramson_frame) {
        if (!wave.bramson_offset) fail(ErrorKind::Coverage, "wave carries no Bramson offset; extract it from a longer run");
        r.frame_shift = *wave.bramson_offset;
    }
    const double k = kWaveLeftSlope;
    std::vector<double> g(wave.z.size());
    double gmax = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = std::exp(-k * (wave.z[i] + r.frame_shift) + 2.0 * wave.logw[i]);
        gmax = std::max(gmax, g[i]);
    }
    if (options.end_decay > 0.0 && (g.front() > options.end_decay * gmax || g.back() > options.end_decay * gmax)) {
        fail(ErrorKind::Coverage, "wave integrand has not decayed at the ends of the abscissae");
    }
    double total = trapezoid(wave.z, g);
    if (options.tail_corrections) {
        r.left_tail = g.front() / k;
        r.right_tail = std::exp(-k * (wave.z.back() + r.frame_shift)) / k;
        total += r.left_tail + r.right_tail;
        if (r.left_tail + r.right_tail > options.tail_budget * total) {
            fail(ErrorKind::Coverage, "tail corrections exceed the truncation budget");
        }
    }
    r.value = 0.5 * total;
    return r;
}

double c2_from_c1(double c1) {
    if (!(c1 > 0.0)) fail(ErrorKind::Domain, "c2_from_c1 needs c1 > 0");
    const double q = kCriticalGammaArg;
    return c1 * std::tgamma(q) / (std::sqrt(2.0 * kPi) * std::pow(2.0, q));
}

}  // namespace bbm
