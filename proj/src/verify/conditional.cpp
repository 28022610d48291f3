#include "bbmlab/verify/conditional.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/core/limit_laws.hpp"
#include "bbmlab/core/regime.hpp"
#include "bbmlab/error.hpp"
#include "bbmlab/fkpp/first_branch.hpp"
#include "bbmlab/verify/diagnostics.hpp"
#include "bbmlab/verify/statistics.hpp"

namespace bbm::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Samples {
    std::vector<double> tau;
    std::vector<double> x;
    std::vector<double> m;
    std::size_t unbranched = 0;
};

Samples collect(const sim::ConditionedBatch& batch) {
    Samples s;
    for (const auto& r : batch.accepted) {
        s.tau.push_back(r.tau);
        s.x.push_back(r.x_at_tau);
        s.m.push_back(r.m_t);
        if (!r.branched) ++s.unbranched;
    }
    return s;
}

/// Piecewise-linear CDF through tabulated points, clamped at the ends.
struct TabulatedCdf {
    std::vector<double> x;
    std::vector<double> f;

    double operator()(double v) const {
        if (v <= x.front()) return f.front();
        if (v >= x.back()) return f.back();
        const auto it = std::upper_bound(x.begin(), x.end(), v);
        const std::size_t i = static_cast<std::size_t>(it - x.begin());
        const double w = (v - x[i - 1]) / (x[i] - x[i - 1]);
        return f[i - 1] + w * (f[i] - f[i - 1]);
    }
};

/// CDF of X(tau ^ t) given M_t <= z: the no-branch part is a Gaussian conditioned below z, the
/// rest mixes the position laws over the tau density.
TabulatedCdf position_cdf(const ConditionalFirstBranch& cf, double lo, double hi) {
    constexpr std::size_t kPoints = 1201;
    TabulatedCdf out;
    out.x.resize(kPoints);
    for (std::size_t j = 0; j < kPoints; ++j) out.x[j] = lo + (hi - lo) * static_cast<double>(j) / (kPoints - 1);
    out.f.assign(kPoints, 0.0);

    const auto& sg = cf.s_marginal.grid();
    const auto& sv = cf.s_marginal.values();
    std::vector<double> prev;
    for (std::size_t i = 0; i < sg.size(); ++i) {
        auto cur = cf.position_laws[i].cumulative_sorted(out.x);
        for (double& c : cur) c *= sv[i];
        if (i > 0) {
            const double h = 0.5 * (sg[i] - sg[i - 1]);
            for (std::size_t j = 0; j < kPoints; ++j) out.f[j] += h * (cur[j] + prev[j]);
        }
        prev = std::move(cur);
    }
    const double denom = brownian_cdf(cf.z, cf.t);
    for (std::size_t j = 0; j < kPoints; ++j)
        out.f[j] += cf.atom * brownian_cdf(std::min(out.x[j], cf.z), cf.t) / denom;
    return out;
}

ComparisonReport stat(std::string name, Layer layer, Comparison cmp, double empirical, double reference, double tolerance,
                      std::uint64_t samples, std::uint64_t min_samples, std::string note = {}) {
    ComparisonReport r;
    r.name = std::move(name);
    r.layer = layer;
    r.comparison = cmp;
    r.empirical = empirical;
    r.reference = reference;
    r.tolerance = tolerance;
    r.samples = samples;
    r.min_samples = min_samples;
    r.note = std::move(note);
    return r;
}

double exponential_ks(const std::vector<double>& e, double rate) {
    return ks_statistic(e, [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); });
}

}  // namespace

double exponential_gap_ks(const sim::ConditionedBatch& batch, double alpha, double t) {
    if (!(alpha < 0.0)) fail(ErrorKind::Domain, "exponential_gap_ks needs alpha < 0");
    if (batch.accepted.empty()) fail(ErrorKind::InvalidInput, "exponential_gap_ks needs accepted samples");
    std::vector<double> e;
    e.reserve(batch.accepted.size());
    for (const auto& r : batch.accepted) e.push_back(kSqrt2 * alpha * t - r.m_t);
    return exponential_ks(e, -kSqrt2 * alpha);
}

std::vector<ComparisonReport> conditional_law_suite(const SolutionField& field, const sim::ConditionedBatch& batch,
                                                    const ConditionalSuiteInput& input, const Tolerances& tol) {
    const auto start = std::chrono::steady_clock::now();
    const double t = input.t;
    const double z = batch.threshold;
    const std::uint64_t n = batch.accepted.size();
    const std::uint64_t min_n = tol.min_samples;
    const bool enough = n >= min_n && n > 0;
    const std::string tag = input.mode == ConditioningMode::Deviation ? fmt::format("cond[t={:g},alpha={:g}]", t, input.alpha)
                                                                    : fmt::format("cond[t={:g},a={:g}]", t, input.a);
    std::vector<ComparisonReport> out;

    auto inconclusive = [&](std::string name, Layer layer) {
        out.push_back(stat(std::move(name), layer, Comparison::AtMost, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, n,
                           min_n, "too few accepted samples"));
    };

    const Samples s = collect(batch);

    // Exact layer.
    const auto cf = conditional_first_branch(field, z, t, ConditionalOptions{.with_position_laws = enough});
    if (enough) {
        const double d_tau = ks_statistic(
            s.tau, [&](double x) { return cf.tau_cdf(x); },
            [&](double x) { return x >= t ? 1.0 - cf.atom : cf.tau_cdf(x); });
        out.push_back(stat(tag + ".exact.tau", Layer::Exact, Comparison::AtMost, d_tau, 0.0, tol.ks_exact, n, min_n,
                           "KS of tau ^ t"));

        const double frac = static_cast<double>(s.unbranched) / static_cast<double>(n);
        const double sigma = std::sqrt(cf.atom * (1.0 - cf.atom) / static_cast<double>(n));
        out.push_back(stat(tag + ".exact.atom", Layer::Exact, Comparison::Within, frac, cf.atom, tol.sigma_multiple * sigma,
                           n, min_n, fmt::format("{:g} sigma", tol.sigma_multiple)));

        const std::size_t k = field.find_slice(t);
        const double lz = cf.log_u;
        const double d_m = ks_statistic(s.m, [&](double y) {
            if (y >= z) return 1.0;
            if (y < field.z_lo(k)) return 0.0;
            return std::exp(std::min(0.0, field.evaluate_slice(k, y).logu - lz));
        });
        out.push_back(stat(tag + ".exact.max", Layer::Exact, Comparison::AtMost, d_m, 0.0, tol.ks_exact, n, min_n,
                           "KS of M_t"));

        const auto [xlo, xhi] = std::minmax_element(s.x.begin(), s.x.end());
        const double pad = 1e-9 + 1e-6 * (*xhi - *xlo);
        const TabulatedCdf xcdf = position_cdf(cf, *xlo - pad, *xhi + pad);
        const double d_x = ks_statistic(s.x, xcdf);
        out.push_back(stat(tag + ".exact.position", Layer::Exact, Comparison::AtMost, d_x, 0.0, tol.ks_exact, n, min_n,
                           "KS of X(tau ^ t)"));
    } else {
        for (const char* name : {".exact.tau", ".exact.atom", ".exact.max", ".exact.position"}) inconclusive(tag + name, Layer::Exact);
    }

    // Asymptotic layer.
    std::size_t first_asymptotic = out.size();
    if (input.mode == ConditioningMode::Moderate) {
        if (enough) {
            const double a = input.a;
            std::vector<double> xi;
            for (double v : s.tau) xi.push_back((v - 0.5 * a) / std::sqrt(a / 8.0));
            const double d = ks_statistic(xi, [](double x) { return normal_cdf(x); });
            out.push_back(stat(tag + ".limit.tau", Layer::Asymptotic, Comparison::AtMost, d, 0.0, tol.ks_moderate_tau, n, min_n,
                               "(tau - a/2)/sqrt(a/8) against N(0,1)"));
        } else {
            inconclusive(tag + ".limit.tau", Layer::Asymptotic);
        }
    } else {
        const RegimeParams rp = classify_regime(input.alpha);
        const double alpha = input.alpha;
        std::vector<double> e;
        for (double m : s.m) e.push_back(kSqrt2 * alpha * t - m);
        if (rp.regime == Regime::Low) {
            if (enough) {
                out.push_back(stat(tag + ".limit.gap", Layer::Asymptotic, Comparison::AtMost, exponential_ks(e, -kSqrt2 * alpha),
                                   0.0, tol.ks_limit_low, n, min_n, "sqrt2 alpha t - M_t against Exp(-sqrt2 alpha)"));
                if (input.phi) {
                    TabulatedCdf xcdf;
                    for (std::size_t k = 0; k < field.slices() && field.time(k) <= t + 1e-9; ++k) {
                        xcdf.x.push_back(field.time(k));
                        xcdf.f.push_back(limit_joint_cdf_low(field.time(k), kInf, 0.0, alpha, field, *input.phi));
                    }
                    std::vector<double> xi;
                    for (double v : s.tau) xi.push_back(t - v);
                    const double d = ks_statistic(xi, xcdf, [&](double x) { return x <= 0.0 ? 0.0 : xcdf(x); });
                    out.push_back(stat(tag + ".limit.xi", Layer::Asymptotic, Comparison::AtMost, d, 0.0, tol.ks_limit_low, n,
                                       min_n, "t - tau ^ t against the limit law"));
                }
            } else {
                inconclusive(tag + ".limit.gap", Layer::Asymptotic);
            }
        } else if (rp.regime == Regime::High) {
            if (enough) {
                const double centre = (1.0 - alpha) * t / kSqrt2;
                const double scale = std::sqrt(t * (1.0 - alpha) / (4.0 * kSqrt2));
                std::vector<double> xi;
                for (double v : s.tau) xi.push_back((v - centre) / scale);
                out.push_back(stat(tag + ".limit.tau", Layer::Asymptotic, Comparison::AtMost,
                                   ks_statistic(xi, [](double x) { return normal_cdf(x); }), 0.0, tol.ks_limit_low, n, min_n,
                                   "standardized tau against N(0,1)"));
                out.push_back(stat(tag + ".limit.gap", Layer::Asymptotic, Comparison::AtMost,
                                   exponential_ks(e, kWaveLeftSlope), 0.0, tol.ks_limit_low, n, min_n,
                                   "sqrt2 alpha t - M_t against Exp(sqrt2 gamma)"));
            } else {
                inconclusive(tag + ".limit.tau", Layer::Asymptotic);
                inconclusive(tag + ".limit.gap", Layer::Asymptotic);
            }
        } else if (rp.regime == Regime::Critical) {
            if (enough) {
                std::vector<double> grid;
                for (int i = 1; i <= 4000; ++i) grid.push_back(0.002 * i);
                const DensityCurve ref = xi_critical_density(grid);
                std::vector<double> xi;
                for (double v : s.tau) xi.push_back((t - v) / std::sqrt(t));
                const double d = ks_statistic(xi, [&](double x) { return x <= 0.0 ? 0.0 : std::min(1.0, ref.cumulative(x)); });
                out.push_back(stat(tag + ".limit.xi", Layer::Asymptotic, Comparison::AtMost, d, 0.0, tol.ks_limit_low, n, min_n,
                                   "(t - tau)/sqrt(t) against the critical limit density"));
            } else {
                inconclusive(tag + ".limit.xi", Layer::Asymptotic);
            }
        }
    }

    bool exact_ok = true;
    for (std::size_t i = 0; i < first_asymptotic; ++i) {
        out[i] = finalize(std::move(out[i]));
        if (out[i].verdict != Verdict::Pass) exact_ok = false;
    }
    for (std::size_t i = first_asymptotic; i < out.size(); ++i) {
        out[i] = finalize(std::move(out[i]));
        if (out[i].verdict == Verdict::Fail && exact_ok) out[i].label = "finite-t gap";
    }

    // Structural layer.
    if (enough) {
        std::vector<double> tau_std, m_std;
        const double mt = mean(s.tau), st = std::sqrt(variance(s.tau));
        const double mm = mean(s.m), sm = std::sqrt(variance(s.m));
        for (std::size_t i = 0; i < n; ++i) {
            tau_std.push_back(st > 0.0 ? (s.tau[i] - mt) / st : 0.0);
            m_std.push_back(sm > 0.0 ? (s.m[i] - mm) / sm : 0.0);
        }
        const double rho = st > 0.0 && sm > 0.0 ? pearson_correlation(tau_std, m_std) : 0.0;
        out.push_back(finalize(stat(tag + ".structure.correlation", Layer::Structural, Comparison::Informational, rho, 0.0, 0.0,
                                    n, min_n, "correlation of standardized tau and M_t")));
    }

    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : out) {
        r.metadata.t = t;
        if (input.mode == ConditioningMode::Deviation) r.metadata.alpha = input.alpha;
        r.metadata.grid = describe_grid(field);
        r.metadata.seed = input.seed;
        r.metadata.runtime_s = runtime;
    }
    order_by_name(out);
    return out;
}

}  // namespace bbm::verify
