#include "bbmlab/verify/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <fmt/format.h>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/density.hpp"
#include "bbmlab/core/limit_laws.hpp"
#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/core/prediction.hpp"
#include "bbmlab/core/regime.hpp"
#include "bbmlab/error.hpp"
#include "bbmlab/fkpp/first_branch.hpp"
#include "bbmlab/verify/statistics.hpp"

namespace bbm::verify {

namespace {

constexpr double kLogFloor = -700.0;

double log_u_at(const SolutionField& field, double z, double t) {
    const std::size_t k = field.find_slice(t);
    if (k == SolutionField::npos) fail(ErrorKind::Coverage, fmt::format("no stored slice at t = {:g}", t));
    const double l = field.evaluate_slice(k, z).logu;
    if (!(l > kLogFloor)) fail(ErrorKind::Precision, fmt::format("log u({:g}, {:g}) is below the accuracy floor", z, t));
    return l;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ComparisonReport make(std::string name, Layer layer, Comparison cmp, double empirical, double reference, double tolerance,
                      std::string note = {}) {
    ComparisonReport r;
    r.name = std::move(name);
    r.layer = layer;
    r.comparison = cmp;
    r.empirical = empirical;
    r.reference = reference;
    r.tolerance = tolerance;
    r.note = std::move(note);
    return r;
}

ComparisonReport band_report(std::string name, double value, Band band) {
    return make(std::move(name), Layer::Asymptotic, Comparison::Within, value, 0.5 * (band.lo + band.hi), 0.5 * (band.hi - band.lo),
                fmt::format("band [{:g}, {:g}]", band.lo, band.hi));
}

template <class LogTarget>
RatioSeries ratio_series(const SolutionField& field, std::string prefix, double alpha, std::span<const double> times,
                         LogTarget log_target, double exponent_target, Band band, const Tolerances& tol) {
    if (times.size() < 2) fail(ErrorKind::InvalidInput, "ratio diagnostics need at least two times");
    const auto start = std::chrono::steady_clock::now();
    RatioSeries out;
    for (double t : times) {
        const double l = log_u_at(field, kSqrt2 * alpha * t, t);
        out.times.push_back(t);
        out.log_u.push_back(l);
        out.ratios.push_back(std::exp(l - log_target(t)));
    }
    const std::size_t n = out.times.size();
    out.reports.push_back(band_report(fmt::format("{}.R({:g})", prefix, out.times.back()), out.ratios.back(), band));
    for (std::size_t i = 2; i < n; ++i) {
        const double prev = std::abs(out.ratios[i - 1] / out.ratios[i - 2] - 1.0);
        const double cur = std::abs(out.ratios[i] / out.ratios[i - 1] - 1.0);
        out.reports.push_back(make(fmt::format("{}.increment({:g},{:g})", prefix, out.times[i - 1], out.times[i]),
                                   Layer::Asymptotic, Comparison::Below, cur, prev, 0.0,
                                   "|R(t_i)/R(t_i-1) - 1| against the previous increment"));
    }
    out.exponent = exponent_slope(field, alpha, out.times[n - 2], out.times[n - 1]);
    out.reports.push_back(make(fmt::format("{}.exponent[{:g},{:g}]", prefix, out.times[n - 2], out.times[n - 1]),
                               Layer::Asymptotic, Comparison::Within, out.exponent, exponent_target, tol.exponent_slope));
    const double runtime = seconds_since(start);
    for (auto& r : out.reports) {
        r.metadata.alpha = alpha;
        r.metadata.t = out.times.back();
        r.metadata.grid = describe_grid(field);
        r.metadata.runtime_s = runtime;
        r = finalize(std::move(r));
    }
    return out;
}

}  // namespace

std::string describe_grid(const SolutionField& field) {
    const auto& g = field.grid();
    return fmt::format("{} z[{:g},{:g}] dz={:g} dt={:g} t_max={:g}", to_string(field.scheme()), g.z_min, g.z_max, g.dz, g.dt,
                       g.t_max);
}

double exponent_slope(const SolutionField& field, double alpha, double t_lo, double t_hi) {
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < field.slices(); ++k) {
        const double t = field.time(k);
        if (t < t_lo - 1e-9 || t > t_hi + 1e-9) continue;
        const double l = field.evaluate_slice(k, kSqrt2 * alpha * t).logu;
        if (!(l > kLogFloor)) fail(ErrorKind::Precision, "log u below the accuracy floor in the exponent window");
        ts.push_back(t);
        ys.push_back(-l);
    }
    if (ts.size() < 2) fail(ErrorKind::Coverage, "exponent window holds fewer than two stored slices");
    return ls_slope(ts, ys);
}

RatioSeries ratio_diagnostic_high(const SolutionField& field, double alpha, double c1, std::span<const double> times, Band band,
                                  const Tolerances& tol) {
    const RegimeParams p = classify_regime(alpha);
    if (p.regime != Regime::High) fail(ErrorKind::Regime, "ratio_diagnostic_high needs -gamma < alpha < 1");
    if (!(c1 > 0.0)) fail(ErrorKind::Domain, "c1 must be positive");
    const double v = *p.v_alpha;
    auto target = [&](double t) { return std::log(c1) + kHighPolyExponent * std::log(v * t) - 2.0 * kGamma * (1.0 - alpha) * t; };
    return ratio_series(field, fmt::format("ratio.high[alpha={:g}]", alpha), alpha, times, target, -rate_function(alpha), band, tol);
}

RatioSeries ratio_diagnostic_low(const SolutionField& field, double alpha, double phi, std::span<const double> times, Band band,
                                 const Tolerances& tol) {
    if (classify_regime(alpha).regime != Regime::Low) fail(ErrorKind::Regime, "ratio_diagnostic_low needs alpha < -gamma");
    if (!(phi > 0.0)) fail(ErrorKind::Domain, "phi must be positive");
    auto target = [&](double t) { return std::log(phi) - 0.5 * std::log(4.0 * kPi * t) - (1.0 + alpha * alpha) * t; };
    const std::string prefix = fmt::format("ratio.low[alpha={:g}]", alpha);
    RatioSeries out = ratio_series(field, prefix, alpha, times, target, -rate_function(alpha), band, tol);
    const std::size_t n = out.ratios.size();
    ComparisonReport trend = make(fmt::format("{}.trend({:g},{:g})", prefix, out.times[n - 2], out.times[n - 1]), Layer::Asymptotic,
                                  Comparison::Below, std::abs(out.ratios[n - 1] - 1.0), std::abs(out.ratios[n - 2] - 1.0), 0.0,
                                  "|R - 1| against its value at the previous time");
    trend.metadata = out.reports.front().metadata;
    out.reports.push_back(finalize(std::move(trend)));
    return out;
}

RatioSeries ratio_diagnostic_critical(const SolutionField& field, double c2, std::span<const double> times, Band band,
                                      const Tolerances& tol) {
    if (!(c2 > 0.0)) fail(ErrorKind::Domain, "c2 must be positive");
    const double alpha = -kGamma;
    auto target = [&](double t) { return std::log(c2) + kCriticalPolyExponent * std::log(t) - (1.0 + kGamma * kGamma) * t; };
    const std::string prefix = "ratio.critical";
    RatioSeries out = ratio_series(field, prefix, alpha, times, target, 1.0 + kGamma * kGamma, band, tol);
    const double t = out.times.back();
    const double a_t = std::pow(t, 0.25);
    const double l = log_u_at(field, -kSqrt2 * kGamma * t + a_t, t);
    const double predicted = predict_near_critical(c2, t, a_t);
    ComparisonReport near = make(fmt::format("{}.near-window({:g})", prefix, t), Layer::Asymptotic, Comparison::Within,
                                 l - std::log(predicted), 0.0, std::log(tol.near_critical_factor),
                                 fmt::format("log of u / prediction at a_t = t^(1/4); ratio {:.4g}", std::exp(l) / predicted));
    near.metadata = out.reports.front().metadata;
    out.reports.push_back(finalize(std::move(near)));
    return out;
}

std::vector<ComparisonReport> moderate_deviation_check(const SolutionField& field, double c1, double t,
                                                       std::span<const double> a_values, const Tolerances& tol) {
    if (!(c1 > 0.0)) fail(ErrorKind::Domain, "c1 must be positive");
    const auto start = std::chrono::steady_clock::now();
    std::vector<ComparisonReport> out;
    std::vector<double> as, logs;
    const double m = bramson_centering(t);
    const Band band{tol.moderate_lo, tol.moderate_hi};
    for (double a : a_values) {
        if (a > t / 4.0) fail(ErrorKind::Regime, fmt::format("moderate deviations need a <= t/4; got a = {:g} at t = {:g}", a, t));
        const double l = log_u_at(field, m - a, t);
        const double ratio = std::exp(l + kWaveLeftSlope * a) / c1;
        const std::string name = fmt::format("moderate[t={:g}].ratio(a={:g})", t, a);
        if (a > 0.0) {
            out.push_back(band_report(name, ratio, band));
            as.push_back(a);
            logs.push_back(l);
        } else {
            out.push_back(make(name, Layer::Asymptotic, Comparison::Informational, ratio, 1.0, 0.0,
                               "outside the a -> infinity hypothesis; unjudged"));
        }
    }
    if (as.size() >= 2) {
        out.push_back(make(fmt::format("moderate[t={:g}].log-slope", t), Layer::Asymptotic, Comparison::Within, ls_slope(as, logs),
                           -kWaveLeftSlope, tol.moderate_slope));
    }
    const double runtime = seconds_since(start);
    for (auto& r : out) {
        r.metadata.t = t;
        r.metadata.grid = describe_grid(field);
        r.metadata.runtime_s = runtime;
        r = finalize(std::move(r));
    }
    return out;
}

CriticalProfile critical_profile_check(const SolutionField& field, double t, const Tolerances& tol) {
    const auto start = std::chrono::steady_clock::now();
    const ConditionalFirstBranch cf = conditional_first_branch(field, -kSqrt2 * kGamma * t, t);
    const auto g = cf.s_marginal.grid();
    const auto v = cf.s_marginal.values();
    const double rt = std::sqrt(t);
    std::vector<double> x, d;
    for (std::size_t i = g.size(); i-- > 0;) {
        if (g[i] >= t) continue;
        x.push_back((t - g[i]) / rt);
        d.push_back(v[i] * rt);
    }
    if (x.size() < 3) fail(ErrorKind::Coverage, fmt::format("too few stored slices below t = {:g}", t));
    const DensityCurve empirical = DensityCurve(x, std::move(d)).normalized();
    const DensityCurve limit = xi_critical_density(x);
    CriticalProfile out;
    out.x = std::move(x);
    out.density.assign(empirical.values().begin(), empirical.values().end());
    out.limit.assign(limit.values().begin(), limit.values().end());
    out.report = make(fmt::format("critical[t={:g}].profile-l1", t), Layer::Asymptotic, Comparison::AtMost,
                      l1_distance(empirical, limit), 0.0, tol.critical_l1,
                      "s-marginal at alpha = -gamma in (t - s)/sqrt(t) against u^{3 gamma/2} exp(-2u^2)");
    out.report.metadata.t = t;
    out.report.metadata.alpha = -kGamma;
    out.report.metadata.grid = describe_grid(field);
    out.report.metadata.runtime_s = seconds_since(start);
    out.report = finalize(std::move(out.report));
    return out;
}

double ds_log_bound(double a, double t, double epsilon, double beta) {
    if (a >= 1.0) return 0.0;
    if (a >= -kGamma) return (-2.0 * kGamma * (1.0 - a) + epsilon) * t;
    if (a >= -beta) return (-(1.0 + a * a) + epsilon) * t;
    return -a * a * t;
}

std::vector<ComparisonReport> bound_audit(const SolutionField& field, const BoundAuditOptions& o, const Tolerances& tol) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ComparisonReport> out;
    auto steps = [&](double lo, double hi) {
        std::vector<double> v;
        const auto n = static_cast<std::size_t>(std::llround((hi - lo) / o.step));
        for (std::size_t i = 0; i <= n; ++i) v.push_back(lo + static_cast<double>(i) * o.step);
        return v;
    };

    for (double t : o.gaussian_times) {
        std::size_t violations = 0;
        double worst = -std::numeric_limits<double>::infinity();
        for (double z : steps(o.gaussian_z_lo, o.gaussian_z_hi)) {
            const double margin = log_u_at(field, z, t) - std::log(brownian_tail_upper(-z, t));
            worst = std::max(worst, margin);
            if (margin > 0.0) ++violations;
        }
        out.push_back(make(fmt::format("bound.gaussian(t={:g})", t), Layer::Bound, Comparison::AtMost,
                           static_cast<double>(violations), 0.0, 0.0,
                           fmt::format("violations of u(z,t) <= sqrt(t) exp(-z^2/2t)/(-z sqrt(2 pi)); worst log margin {:.4g}", worst)));
        out.back().metadata.t = t;
    }

    {
        std::size_t violations = 0;
        for (int i = 0; i <= 21; ++i) {
            const double z = 1.5 + 0.5 * i;
            const TailBounds b = normal_tail_bounds(z);
            const double exact = 0.5 * std::erfc(z / kSqrt2);
            if (!(b.lower <= exact && exact <= b.upper)) ++violations;
        }
        out.push_back(make("bound.mills-sandwich", Layer::Bound, Comparison::AtMost, static_cast<double>(violations), 0.0, 0.0,
                           "z in {1.5, 2, ..., 12} against erfc"));
    }

    for (double t : o.ds_times) {
        std::size_t violations = 0;
        double worst = -std::numeric_limits<double>::infinity();
        double worst_a = 0.0;
        for (double a : steps(o.ds_a_lo, o.ds_a_hi)) {
            const double margin = log_u_at(field, kSqrt2 * a * t, t) - ds_log_bound(a, t, tol.ds_epsilon, o.ds_beta);
            if (margin > worst) {
                worst = margin;
                worst_a = a;
            }
            if (margin > 0.0) ++violations;
        }
        out.push_back(make(fmt::format("bound.large-deviation(t={:g})", t), Layer::Bound, Comparison::AtMost,
                           static_cast<double>(violations), 0.0, 0.0,
                           fmt::format("epsilon {:g}; worst log margin {:.4g} at a = {:.2f}", tol.ds_epsilon, worst, worst_a)));
        out.back().metadata.t = t;
    }

    if (!o.ch_times.empty()) {
        const double k = kWaveLeftSlope * (1.0 - tol.ch_delta);
        std::vector<double> fitted;
        for (double t : o.ch_times) {
            const double m = bramson_centering(t);
            double c = 0.0;
            for (double z : steps(o.ch_z_lo, o.ch_z_hi)) c = std::max(c, std::exp(log_u_at(field, m - z, t) + k * z));
            fitted.push_back(c);
        }
        const double c_ref = fitted.front();
        // Any later constant within the stability band counts as the same c_delta.
        const double c_bound = c_ref * (1.0 + tol.ch_stability);
        for (std::size_t j = 1; j < o.ch_times.size(); ++j) {
            const double t = o.ch_times[j];
            const double m = bramson_centering(t);
            std::size_t violations = 0;
            for (double z : steps(o.ch_z_lo, o.ch_z_hi)) {
                if (log_u_at(field, m - z, t) > std::log(c_bound) - k * z) ++violations;
            }
            out.push_back(make(fmt::format("bound.moderate(t={:g})", t), Layer::Bound, Comparison::AtMost, static_cast<double>(violations),
                               0.0, 0.0,
                               fmt::format("delta {:g}; constant {:.4g} = (1 + {:g}) x fit at t = {:g}", tol.ch_delta, c_bound, tol.ch_stability,
                                           o.ch_times.front())));
            out.back().metadata.t = t;
            out.push_back(make(fmt::format("bound.moderate-constant(t={:g})", t), Layer::Bound, Comparison::Within,
                               fitted[j] / c_ref, 1.0, tol.ch_stability,
                               fmt::format("fitted constant {:.4g} relative to t = {:g}", fitted[j], o.ch_times.front())));
            out.back().metadata.t = t;
        }
    }

    const double runtime = seconds_since(start);
    for (auto& r : out) {
        r.metadata.grid = describe_grid(field);
        r.metadata.runtime_s = runtime;
        r = finalize(std::move(r));
    }
    return out;
}

}  // namespace bbm::verify
