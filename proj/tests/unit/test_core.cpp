#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/density.hpp"
#include "bbmlab/core/deviation_constants.hpp"
#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/core/intervals.hpp"
#include "bbmlab/core/limit_laws.hpp"
#include "bbmlab/core/prediction.hpp"
#include "bbmlab/core/quadrature.hpp"
#include "bbmlab/core/regime.hpp"
#include "bbmlab/error.hpp"
#include "bbmlab/fkpp/wave.hpp"

using namespace bbm;

namespace {

// Lanczos approximation (g = 7, n = 9).
double lanczos_gamma(double x) {
    static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                               771.32342877765313,   -176.61502916214059,   12.507343278686905,
                               -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
    x -= 1.0;
    double a = c[0];
    const double t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
    return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

double golden_min(const auto& f, double lo, double hi) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - r * (b - a), d = a + r * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) < f(d)) b = d;
        else a = c;
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST(Regime, ClassifiesTheThreeRegimes) {
    EXPECT_EQ(classify_regime(0.0).regime, Regime::High);
    EXPECT_EQ(classify_regime(-1.0).regime, Regime::Low);
    EXPECT_EQ(classify_regime(-kGamma).regime, Regime::Critical);
    EXPECT_EQ(classify_regime(1.0).regime, Regime::Trivial);
    const auto snapped = classify_regime(-kGamma + 1e-13);
    EXPECT_EQ(snapped.regime, Regime::Critical);
    EXPECT_TRUE(snapped.snapped_to_critical);
    ASSERT_TRUE(classify_regime(0.0).v_alpha.has_value());
    EXPECT_DOUBLE_EQ(*classify_regime(0.0).v_alpha, kGamma / kSqrt2);
    EXPECT_FALSE(classify_regime(-1.0).v_alpha.has_value());
    EXPECT_THROW(classify_regime(NAN), Error);
}

TEST(Regime, DerivedQuantities) {
    const auto p = classify_regime(0.0);
    EXPECT_NEAR(*p.v_alpha, 1.0 - 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(*p.v_alpha, 0.2928932, 1e-7);
    EXPECT_NEAR(p.lambda_alpha, 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_EQ(classify_regime(-0.5).regime, Regime::Low);
    EXPECT_EQ(classify_regime(1.0 - std::sqrt(2.0)).regime, Regime::Critical);
    EXPECT_NEAR(*classify_regime(0.9).v_alpha, (kGamma + 0.9) / std::sqrt(2.0), 1e-15);
    // 1 + gamma^2 = 2 sqrt2 gamma = 4 - 2 sqrt2.
    EXPECT_NEAR(1.0 + kGamma * kGamma, 2.0 * kSqrt2 * kGamma, 1e-15);
    EXPECT_NEAR(1.0 + kGamma * kGamma, 4.0 - 2.0 * kSqrt2, 1e-15);
    for (double alpha : {-1.0, 0.0, 0.5}) EXPECT_NEAR(g_profile(alpha, 1e-12), 1.0 + alpha * alpha, 1e-10);
    EXPECT_NEAR(g_profile(0.0, *p.v_alpha) - 2.0 * kGamma, 0.0, 1e-15);
    const double e = std::numbers::e;
    EXPECT_NEAR(bramson_centering(e), std::sqrt(2.0) * e - 3.0 / (2.0 * std::sqrt(2.0)), 1e-14);
    EXPECT_NEAR(bramson_centering(100.0), std::sqrt(2.0) * 100.0 - 3.0 / (2.0 * std::sqrt(2.0)) * std::log(100.0), 1e-12);
}

TEST(Regime, RateFunctionValuesAndContinuity) {
    EXPECT_DOUBLE_EQ(rate_function(-1.0), -2.0);
    EXPECT_NEAR(rate_function(0.0), -2.0 * (std::sqrt(2.0) - 1.0), 1e-15);
    EXPECT_NEAR(rate_function(-kGamma), -(4.0 - 2.0 * std::sqrt(2.0)), 1e-14);
    const double left = -(1.0 + kGamma * kGamma);
    EXPECT_NEAR(rate_function(-kGamma - 1e-9), left, 1e-8);
    EXPECT_NEAR(rate_function(-kGamma + 1e-9), left, 1e-8);
    EXPECT_EQ(rate_function(1.5), 0.0);
    for (double a = -2.0; a < 0.99; a += 0.05) EXPECT_LE(rate_function(a), 0.0);
}

TEST(Regime, GArgminAgreesWithGoldenSection) {
    for (double alpha : {-0.3, 0.0, 0.4, 0.8}) {
        const auto m = g_argmin(alpha);
        const double u = golden_min([&](double x) { return g_profile(alpha, x); }, 1e-9, 1.0 - 1e-9);
        EXPECT_NEAR(m.argmin, u, 1e-7) << alpha;
        EXPECT_NEAR(m.value, g_profile(alpha, u), 1e-12) << alpha;
        EXPECT_NEAR(m.value, -rate_function(alpha), 1e-10) << alpha;
    }
    EXPECT_THROW(g_argmin(-1.0), Error);
}

TEST(Regime, BramsonCentering) {
    EXPECT_NEAR(bramson_centering(1.0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(bramson_centering(40.0), std::sqrt(2.0) * 40.0 - 3.0 / (2.0 * std::sqrt(2.0)) * std::log(40.0), 1e-12);
    EXPECT_THROW(bramson_centering(0.0), Error);
}

TEST(Gaussian, CdfMatchesErfc) {
    for (double x = -30.0; x <= 8.0; x += 0.37) {
        const double ref = 0.5 * std::erfc(-x / std::sqrt(2.0));
        EXPECT_NEAR(normal_cdf(x), ref, 1e-15 + 1e-13 * ref) << x;
        if (ref > 0.0) EXPECT_NEAR(log_normal_cdf(x), std::log(ref), 1e-12) << x;
    }
}

TEST(Gaussian, LogCdfFarTail) {
    // Asymptotic series: log Phi(x) = -x^2/2 - log(-x sqrt(2 pi)) + log(1 - 1/x^2 + 3/x^4 - 15/x^6).
    for (double x : {-40.0, -100.0, -1000.0}) {
        const double series = -0.5 * x * x - std::log(-x * std::sqrt(2.0 * std::numbers::pi)) +
                              std::log(1.0 - 1.0 / (x * x) + 3.0 / std::pow(x, 4) - 15.0 / std::pow(x, 6));
        EXPECT_NEAR(log_normal_cdf(x), series, 1e-9 * std::abs(series)) << x;
    }
}

TEST(Gaussian, TailBoundExamples) {
    const auto b2 = normal_tail_bounds(2.0);
    const double pdf2 = std::exp(-2.0) / std::sqrt(2.0 * std::numbers::pi);
    EXPECT_NEAR(b2.upper, pdf2 / 2.0, 1e-16);
    EXPECT_NEAR(b2.exact, 0.5 * std::erfc(std::sqrt(2.0)), 1e-15 * b2.exact);
    EXPECT_NEAR(b2.exact, 0.0227501, 1e-7);
    EXPECT_NEAR(b2.lower, b2.upper / 2.0, 1e-16);
    const auto b10 = normal_tail_bounds(10.0);
    EXPECT_GT(b10.exact / b10.upper, 0.98);
    EXPECT_LT(b10.exact / b10.upper, 1.0);
    const auto b1 = normal_tail_bounds(1.0);
    EXPECT_LT(b1.lower, 0.0);
    EXPECT_LE(b1.lower, b1.exact);
    EXPECT_THROW(normal_tail_bounds(0.0), Error);
}

TEST(Gaussian, MillsSandwich) {
    for (double z = 1.5; z <= 12.0; z += 0.5) {
        const auto b = normal_tail_bounds(z);
        const double exact = 0.5 * std::erfc(z / std::sqrt(2.0));
        EXPECT_NEAR(b.exact, exact, 1e-13 * exact);
        EXPECT_LE(b.lower, exact);
        EXPECT_GE(b.upper, exact);
    }
    for (double t : {1.0, 5.0, 40.0})
        for (double z = 0.5; z < 30.0; z += 0.5) {
            const double tail = 0.5 * std::erfc(z / std::sqrt(2.0 * t));
            EXPECT_GE(brownian_tail_upper(z, t), tail * (1.0 - 1e-14));
        }
}

TEST(Gaussian, CellMassAndInterval) {
    const double h = 0.01, s = 2.0;
    for (double y : {-30.0, -1.0, 0.0, 3.0}) {
        const double a = (y - h / 2) / std::sqrt(s), b = (y + h / 2) / std::sqrt(s);
        const double ref = 0.5 * (std::erfc(-b / std::sqrt(2.0)) - std::erfc(-a / std::sqrt(2.0)));
        if (ref > 1e-300) EXPECT_NEAR(log_gaussian_cell_mass(y, s, h), std::log(ref), 1e-6) << y;
    }
    // Both ends deep in the same tail: compare against a fine midpoint rule in log space.
    const double a = 38.0, b = 38.5;
    double acc = 0.0;
    const int n = 400000;
    const double dx = (b - a) / n;
    for (int i = 0; i < n; ++i) {
        const double x = a + (i + 0.5) * dx;
        acc += std::exp(-0.5 * (x * x - a * a));
    }
    const double ref = std::log(acc * dx / std::sqrt(2.0 * std::numbers::pi)) - 0.5 * a * a;
    EXPECT_NEAR(log_normal_interval(a, b), ref, 1e-8);
}

TEST(Quadrature, TrapezoidConvergesAtSecondOrder) {
    auto err = [](int n) {
        std::vector<double> y(n + 1);
        const double h = std::numbers::pi / n;
        for (int i = 0; i <= n; ++i) y[i] = std::sin(i * h);
        return std::abs(trapezoid_uniform(y, h) - 2.0);
    };
    const double e1 = err(100), e2 = err(200);
    EXPECT_NEAR(e1 / e2, 4.0, 0.01);
    // Richardson extrapolation removes the h^2 term.
    auto val = [](int n) {
        std::vector<double> y(n + 1);
        const double h = std::numbers::pi / n;
        for (int i = 0; i <= n; ++i) y[i] = std::sin(i * h);
        return trapezoid_uniform(y, h);
    };
    EXPECT_NEAR((4.0 * val(200) - val(100)) / 3.0, 2.0, 1e-9);
}

TEST(Quadrature, NonUniformAndLogDomain) {
    const std::vector<double> x{0.0, 0.1, 0.5, 1.0};
    const std::vector<double> y{1.0, 2.0, 0.0, 4.0};
    EXPECT_DOUBLE_EQ(trapezoid(x, y), 0.05 * 3.0 + 0.2 * 2.0 + 0.25 * 4.0);
    std::vector<double> ly(101);
    for (int i = 0; i <= 100; ++i) ly[i] = -800.0 + 0.01 * i;
    std::vector<double> shifted(101);
    for (int i = 0; i <= 100; ++i) shifted[i] = std::exp(ly[i] + 800.0);
    EXPECT_NEAR(log_trapezoid_uniform(ly, 0.1), std::log(trapezoid_uniform(shifted, 0.1)) - 800.0, 1e-12);
    const std::vector<double> big{1000.0, 1000.0};
    EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
    const std::vector<double> zeros(3, -INFINITY);
    EXPECT_EQ(log_trapezoid_uniform(zeros, 0.1), -INFINITY);
}

TEST(Density, CumulativeAndSweepAgree) {
    std::vector<double> g, v;
    for (int i = 0; i <= 400; ++i) {
        g.push_back(-4.0 + 0.02 * i);
        v.push_back(std::exp(-0.5 * g.back() * g.back()));
    }
    const DensityCurve d = DensityCurve(g, v).normalized();
    EXPECT_NEAR(d.normalization(), 1.0, 1e-14);
    std::vector<double> xs;
    for (double x = -5.0; x <= 5.0; x += 0.013) xs.push_back(x);
    const auto sweep = d.cumulative_sorted(xs);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(sweep[i], d.cumulative(xs[i]), 1e-13) << xs[i];
    EXPECT_NEAR(d.cumulative(0.0), 0.5, 1e-12);
    EXPECT_NEAR(d.mode(), 0.0, 1e-12);
}

TEST(Density, L1DistanceOfShiftedBoxes) {
    const DensityCurve a({0.0, 1e-9, 1.0, 1.0 + 1e-9}, {0.0, 1.0, 1.0, 0.0});
    const DensityCurve b({0.5, 0.5 + 1e-9, 1.5, 1.5 + 1e-9}, {0.0, 1.0, 1.0, 0.0});
    EXPECT_NEAR(l1_distance(a, a), 0.0, 1e-15);
    EXPECT_NEAR(l1_distance(a, b), 1.0, 1e-6);
}

TEST(Constants, C2OverC1MatchesLanczosGamma) {
    const double q = (3.0 * std::sqrt(2.0) - 1.0) / 4.0;
    const double ref = lanczos_gamma(q) / (std::sqrt(2.0 * std::numbers::pi) * std::pow(2.0, q));
    EXPECT_NEAR(c2_from_c1(1.0), ref, 1e-12);
    EXPECT_NEAR(c2_from_c1(1.7) / 1.7, ref, 1e-12);
}

TEST(Constants, C2IsLinearInC1) {
    EXPECT_EQ(c2_from_c1(2.0 * 0.37) / c2_from_c1(0.37), 2.0);
    EXPECT_THROW(c2_from_c1(0.0), Error);
    EXPECT_THROW(c2_from_c1(-1.0), Error);
}

TEST(Constants, C1OfAConstantProfile) {
    WaveProfile w;
    for (int i = -2000; i <= 2000; ++i) {
        w.z.push_back(i * 0.0005);
        w.w.push_back(1.0);
        w.logw.push_back(0.0);
    }
    C1Options o;
    o.bramson_frame = false;
    o.tail_corrections = false;
    o.end_decay = 0.0;
    const double k = kWaveLeftSlope;
    EXPECT_NEAR(c1_from_wave(w, o).value, std::sinh(k) / k, 1e-8);
    // Same profile without the decay waiver: the integrand never decays.
    o.end_decay = 1e-6;
    try {
        c1_from_wave(w, o);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Coverage);
    }
    o.bramson_frame = true;
    EXPECT_THROW(c1_from_wave(w, o), Error);
}

TEST(CriticalDensity, ModeAndGammaIdentity) {
    const double q = (3.0 * std::sqrt(2.0) - 1.0) / 4.0;
    auto raw = [](double u) { return std::pow(u, 1.5 * kGamma) * std::exp(-2.0 * u * u); };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double integral = ts.integrate(raw, 0.0, std::numeric_limits<double>::infinity());
    const double closed = lanczos_gamma(q) / std::pow(2.0, 1.0 + q);
    EXPECT_NEAR(integral / closed, 1.0, 1e-10);
    // The two forms of the critical constant: (1/sqrt(2 pi)) I * (2 C1) = C2.
    const double c1 = 1.7;
    EXPECT_NEAR(integral * 2.0 * c1 / std::sqrt(2.0 * std::numbers::pi) / c2_from_c1(c1), 1.0, 1e-6);

    std::vector<double> grid;
    for (int i = 1; i <= 8000; ++i) grid.push_back(0.0005 * i);
    const DensityCurve d = xi_critical_density(grid);
    EXPECT_NEAR(d.normalization(), 1.0, 1e-12);
    EXPECT_NEAR(d.mode(), std::sqrt(3.0 * kGamma / 8.0), 0.0005);
    for (double u : {0.05, 0.3, 0.6, 1.2}) EXPECT_NEAR(d.at(u) / (raw(u) / closed), 1.0, 1e-3) << u;
    EXPECT_THROW(xi_critical_density({0.0, 1.0}), Error);
    EXPECT_THROW(xi_critical_density({}), Error);
}

TEST(Prediction, ClosedForms) {
    const double c1 = 1.7;
    EXPECT_NEAR(predict_moderate(c1, 5.0), c1 * std::exp(-kWaveLeftSlope * 5.0), 1e-15);
    const double t = 30.0, a = 2.0, c2 = 0.45;
    const double ref = c2 * std::pow(t, 0.75 * kGamma) * std::exp(-2.0 * kSqrt2 * kGamma * t + kSqrt2 * kGamma * a);
    EXPECT_NEAR(predict_near_critical(c2, t, a) / ref, 1.0, 1e-12);

    DeviationConstants k;
    k.phi = 2.3;
    const auto low = predict_probability(classify_regime(-1.0), k);
    const double tt = 10.0;
    EXPECT_NEAR(low.log_evaluate(tt), std::log(2.3 / std::sqrt(4.0 * std::numbers::pi * tt)) - 2.0 * tt, 1e-12);
    EXPECT_THROW(predict_probability(classify_regime(0.0), k), Error);
}

TEST(Intervals, WilsonClosedForm) {
    const double z = 1.959963984540054;
    for (auto [k, n] : {std::pair<std::uint64_t, std::uint64_t>{0, 100}, {5, 100}, {50, 100}, {100, 100}, {7, 100000}}) {
        const Interval w = wilson_interval(k, n);
        const double p = static_cast<double>(k) / n;
        const double centre = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
        const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4.0 * n * n)) / (1.0 + z * z / n);
        EXPECT_NEAR(w.lower, std::max(0.0, centre - half), 1e-12);
        EXPECT_NEAR(w.upper, std::min(1.0, centre + half), 1e-12);
        EXPECT_LE(w.lower, p);
        EXPECT_GE(w.upper, p);
    }
}
