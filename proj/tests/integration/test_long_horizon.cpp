#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "bbmlab/cli/app.hpp"
#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/deviation_constants.hpp"
#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/core/limit_laws.hpp"
#include "bbmlab/core/regime.hpp"
#include "bbmlab/error.hpp"
#include "bbmlab/fkpp/first_branch.hpp"
#include "bbmlab/fkpp/solvers.hpp"
#include "bbmlab/fkpp/wave.hpp"
#include "bbmlab/io/files.hpp"
#include "bbmlab/sim/bbm.hpp"
#include "bbmlab/verify/conditional.hpp"
#include "bbmlab/verify/diagnostics.hpp"
#include "bbmlab/verify/statistics.hpp"

using namespace bbm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SolutionField solve(double z_min, double z_max, double dz, double dt, double t_max, double store) {
    SpaceTimeGrid g;
    g.z_min = z_min;
    g.z_max = z_max;
    g.dz = dz;
    g.dt = dt;
    g.t_max = t_max;
    FdOptions o;
    o.store_every = static_cast<std::size_t>(std::llround(store / dt));
    return solve_fd(g, InitialCondition::heaviside(), o);
}

const SolutionField& field60() {
    static const SolutionField f = solve(-220.0, 120.0, 0.02, 0.01, 60.0, 0.05);
    return f;
}

const WaveProfile& wave40() {
    static const WaveProfile w = extract_wave(field60(), 40.0);
    return w;
}

double c1() {
    static const double c = c1_from_wave(wave40()).value;
    return c;
}

double phi(double alpha) { return phi_alpha(alpha, field60()).value; }

}  // namespace

TEST(LongField, Invariants) {
    const auto r = check_field_invariants(field60(), 1e-9, 1e-6, 0.5);
    EXPECT_TRUE(r.ok()) << r.range_violations << " " << r.monotone_violations << " " << r.upper_violations << " "
                        << r.lower_violations;
}

TEST(Front, TracksBramsonCentering) {
    const FrontTrack half = front_position(field60(), 0.5);
    const double d40 = half(40.0) - bramson_centering(40.0);
    const double d60 = half(60.0) - bramson_centering(60.0);
    EXPECT_LE(std::abs(d60 - d40), 0.2);
    // Speed approaches sqrt2 only through the log correction of m_t.
    EXPECT_NEAR(half(60.0) / bramson_centering(60.0), 1.0, 0.02);
    EXPECT_LT(half(20.0) / 20.0, half(40.0) / 40.0);
    EXPECT_LT(half(40.0) / 40.0, half(60.0) / 60.0);
    EXPECT_LT(half(60.0) / 60.0, kSqrt2);
    std::vector<double> ts, ds;
    for (double t = 20.0; t <= 60.0 + 1e-9; t += 1.0) {
        ts.push_back(t);
        ds.push_back(half(t) - bramson_centering(t));
    }
    EXPECT_LE(std::abs(verify::ls_slope(ts, ds)), 0.01);
    const FrontTrack hi = front_position(field60(), 0.9), lo = front_position(field60(), 0.1);
    for (double t : {1.0, 20.0, 60.0}) EXPECT_GT(hi(t), lo(t)) << t;
    EXPECT_THROW(half(61.0), Error);
}

TEST(Wave, SelfConvergesAndIsMedianCentred) {
    const WaveProfile w20 = extract_wave(field60(), 20.0);
    EXPECT_NEAR(wave40().at(0.0), 0.5, 1e-12);
    EXPECT_NEAR(w20.at(0.0), 0.5, 1e-12);
    const WaveProfile w60 = extract_wave(field60(), 60.0);
    auto sup = [](const WaveProfile& a, const WaveProfile& b) {
        double worst = 0.0;
        for (double z = -3.0; z <= 3.0; z += 0.01) worst = std::max(worst, std::abs(a.at(z) - b.at(z)));
        return worst;
    };
    // Profiles relax like 1/t: sup|w_s - w_t| ~ c |1/s - 1/t|.
    const double d2040 = sup(w20, wave40()), d4060 = sup(wave40(), w60);
    EXPECT_LE(d4060, 5e-3);
    EXPECT_NEAR(d2040 / d4060, 3.0, 0.6);
    EXPECT_NEAR(wave40().left_slope, kWaveLeftSlope, 0.05);
    ASSERT_TRUE(wave40().bramson_offset.has_value());
}

TEST(Duhamel, FirstStepExpansion) {
    // u(z, t) = e^{-t} P(B_t <= z) + t J(z / sqrt t) + O(t^2), where
    // J(x) = int_0^1 P(N_1 <= x, N_2 <= x; corr r) dr.
    auto first_order = [](double x) {
        boost::math::quadrature::tanh_sinh<double> q;
        const double rest = q.integrate([x](double r) { return std::sqrt((1.0 - r) / (1.0 + r)) * std::exp(-x * x / (1.0 + r)); },
                                        0.0, 1.0);
        return normal_cdf(x) * normal_cdf(x) + rest / (2.0 * kPi);
    };
    // One trapezoid step over the first interval replaces dt J(x) by dt (Phi^2 + Phi) / 2; the defect
    // lives in the sqrt(dt) layer around the initial jump.
    const double defect0 = 0.375 - first_order(0.0);
    for (double dt : {0.004, 0.002}) {
        SpaceTimeGrid g;
        g.z_min = -20.0;
        g.z_max = 20.0;
        g.dz = 0.002;
        g.dt = dt;
        g.t_max = 4.0 * dt;
        DuhamelOptions o;
        const SolutionField f = solve_duhamel(g, o);
        double zeroth = 0.0, outside = 0.0;
        for (double z = -0.6; z <= 0.6 + 1e-12; z += 0.01) {
            const double x = z / std::sqrt(dt), u = f.evaluate_slice(1, z).u;
            const double no_branch = std::exp(-dt) * normal_cdf(x);
            zeroth = std::max(zeroth, std::abs(u - no_branch));
            if (std::abs(x) >= 6.0) outside = std::max(outside, std::abs(u - no_branch - dt * first_order(x)));
        }
        EXPECT_GT(zeroth, 0.5 * dt) << dt;
        EXPECT_LE(outside, 2.0 * dt * dt) << dt;
        const double at0 = f.evaluate_slice(1, 0.0).u - 0.5 * std::exp(-dt) - dt * first_order(0.0);
        EXPECT_NEAR(at0 / (dt * defect0), 1.0, 0.1) << dt;
    }
}

TEST(FirstBranch, NoBranchTermAsymptotics) {
    // sqrt(t) e^{(1 + alpha^2) t} U1(sqrt2 alpha t, t) -> 1/(sqrt(4 pi) |alpha|) at alpha = -1, t = 20.
    const double t = 20.0, alpha = -1.0, z = kSqrt2 * alpha * t;
    const auto cf = conditional_first_branch(field60(), z, t);
    const double log_u1 = std::log(cf.atom) + field60().evaluate(z, t).logu;
    const double scaled = std::exp(0.5 * std::log(t) + (1.0 + alpha * alpha) * t + log_u1);
    EXPECT_NEAR(scaled * std::sqrt(4.0 * kPi) * std::abs(alpha), 1.0, 0.05);
}

TEST(FirstBranch, AtomTendsToItsLimit) {
    const double alpha = -1.0, limit = (-1.0 / alpha) / phi(alpha);
    double previous = kInf;
    for (double t : {10.0, 20.0, 30.0}) {
        const double gap = std::abs(conditional_first_branch(field60(), kSqrt2 * alpha * t, t).atom - limit);
        EXPECT_LT(gap, previous) << t;
        previous = gap;
    }
    // Share of the no-branch term at t = 30 within 10%.
    EXPECT_NEAR(conditional_first_branch(field60(), -kSqrt2 * 30.0, 30.0).atom / limit, 1.0, 0.1);
}

TEST(FirstBranch, IdentityAndSliceBounds) {
    const SolutionField f = solve(-40.0, 30.0, 0.01, 0.005, 4.0, 0.01);
    for (double z : {-4.0 * kSqrt2, -2.0, 0.0, 3.0}) {
        const auto cf = conditional_first_branch(f, z, 4.0);
        EXPECT_LT(cf.identity_residual, 1e-3) << z;
    }
    for (std::size_t k = 1; k + 1 < f.slices(); k += 37) {
        const double s = 4.0 - f.time(k);
        for (double z : {-6.0, 0.0, 4.0}) EXPECT_LE(log_branch_expectation(f, k, z, s), 1e-12);
    }
    // Far right: conditioning on an almost sure event leaves P(tau > t) = e^{-t}.
    EXPECT_NEAR(conditional_first_branch(f, 29.0, 4.0).atom / std::exp(-4.0), 1.0, 1e-9);
    EXPECT_NEAR(first_branch_density(f, 0.0, 4.0, 1.0, 0.3),
                std::exp(-1.0) * std::exp(-0.5 * 0.09) / std::sqrt(2.0 * kPi) * std::pow(f.evaluate(-0.3, 3.0).u, 2), 1e-6);
}

TEST(Phi, ValueRefinementAndLargeAlpha) {
    const SolutionField coarse = solve(-80.0, 40.0, 0.02, 0.01, 20.0, 0.05);
    const SolutionField fine = solve(-80.0, 40.0, 0.01, 0.005, 20.0, 0.025);
    const double a = phi_alpha(-1.0, coarse).value, b = phi_alpha(-1.0, fine).value;
    EXPECT_GT(a, 1.0);
    EXPECT_LE(std::abs(b / a - 1.0), 0.01);
    EXPECT_NEAR(phi(-1.0) / a, 1.0, 0.01);

    double previous = kInf;
    for (double alpha : {-4.0, -8.0, -16.0}) {
        const PhiResult r = phi_alpha(alpha, coarse);
        EXPECT_GT(r.value, -1.0 / alpha);
        EXPECT_LT(r.value, previous);
        previous = r.value;
        if (alpha == -8.0) EXPECT_LE(r.integral_term, 0.1 * r.value);
    }
    try {
        phi_alpha(0.0, coarse);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Regime);
    }
}

TEST(LimitLaws, HighRegimeJointCdf) {
    const WaveProfile& w = wave40();
    EXPECT_NEAR(limit_joint_cdf_high(kInf, kInf, 0.0, w, c1()), 1.0, 1e-6);
    EXPECT_NEAR(limit_joint_cdf_high(0.0, kInf, 0.0, w, c1()), 0.5, 1e-6);
    for (double x3 : {0.5, 1.0, 3.0})
        EXPECT_NEAR(limit_joint_cdf_high(kInf, kInf, x3, w, c1()), std::exp(-kWaveLeftSlope * x3), 1e-6) << x3;
    double previous = 0.0;
    for (double x2 = -6.0; x2 <= 6.0; x2 += 0.5) {
        const double v = limit_joint_cdf_high(0.3, x2, 0.2, w, c1());
        EXPECT_GE(v, previous - 1e-12);
        EXPECT_LE(v, 1.0);
        previous = v;
    }
}

TEST(LimitLaws, LowRegimeJointCdf) {
    const double alpha = -1.0, p = phi(alpha);
    const SolutionField& f = field60();
    EXPECT_NEAR(limit_joint_cdf_low(kInf, kInf, 0.0, alpha, f, p), 1.0, 1e-3);
    EXPECT_NEAR(limit_joint_cdf_low(0.0, kInf, 0.0, alpha, f, p), 1.0 / (-alpha * p), 1e-12);
    for (double x3 : {0.5, 1.0, 2.0})
        EXPECT_NEAR(limit_joint_cdf_low(kInf, kInf, x3, alpha, f, p), std::exp(kSqrt2 * alpha * x3), 1e-3) << x3;
    double previous = 0.0;
    for (double x1 = 0.0; x1 <= 10.0; x1 += 0.5) {
        const double v = limit_joint_cdf_low(x1, kInf, 0.0, alpha, f, p);
        EXPECT_GE(v, previous - 1e-12);
        previous = v;
    }
}

TEST(Ratios, LowRegimeTrend) {
    const std::vector<double> times{10.0, 20.0, 30.0};
    const auto rs = verify::ratio_diagnostic_low(field60(), -1.0, phi(-1.0), times, {0.8, 1.25});
    for (const auto& r : rs.reports) EXPECT_EQ(r.verdict, verify::Verdict::Pass) << r.name << " " << r.empirical;
    EXPECT_NEAR(verify::exponent_slope(field60(), -1.0, 20.0, 30.0), 2.0, 0.03);
}

TEST(Ratios, CriticalIncludesNearCriticalWindow) {
    const std::vector<double> times{20.0, 30.0, 40.0};
    const auto rs = verify::ratio_diagnostic_critical(field60(), c2_from_c1(c1()), times);
    for (const auto& r : rs.reports) EXPECT_EQ(r.verdict, verify::Verdict::Pass) << r.name << " " << r.empirical;
    EXPECT_NEAR(verify::exponent_slope(field60(), -kGamma, 30.0, 40.0), 4.0 - 2.0 * kSqrt2, 0.03);
}

TEST(Ratios, HighRegimeNearOneIsWellPosed) {
    const std::vector<double> times{20.0, 30.0, 40.0};
    const auto rs = verify::ratio_diagnostic_high(field60(), 0.9, c1(), times);
    for (double r : rs.ratios) EXPECT_TRUE(std::isfinite(r) && r > 0.0);
}

TEST(Moderate, UnjudgedAtZeroAndSlopeOverFourToEight) {
    const std::vector<double> as{0.0, 4.0, 5.0, 6.0, 7.0, 8.0};
    const auto rs = verify::moderate_deviation_check(field60(), c1(), 40.0, as);
    EXPECT_EQ(rs.front().comparison, verify::Comparison::Informational);
    const auto slope = std::find_if(rs.begin(), rs.end(), [](const auto& r) { return r.name.ends_with("log-slope"); });
    ASSERT_NE(slope, rs.end());
    EXPECT_EQ(slope->verdict, verify::Verdict::Pass) << slope->empirical;
    const std::vector<double> too_far{11.0};
    EXPECT_THROW(verify::moderate_deviation_check(field60(), c1(), 40.0, too_far), Error);
}

TEST(Bounds, ExactInequalitiesHold) {
    const auto rs = verify::bound_audit(field60());
    for (const auto& r : rs) {
        if (r.name.starts_with("bound.gaussian") || r.name == "bound.mills-sandwich") {
            EXPECT_EQ(r.empirical, 0.0) << r.name;
            EXPECT_EQ(r.verdict, verify::Verdict::Pass) << r.name;
        }
    }
}

TEST(Conditional, ModerateModeExactLayerAndTauTrend) {
    auto limit_tau = [](double t, double a, std::uint64_t seed) {
        sim::SimConfig c;
        c.horizon = t;
        c.seed = seed;
        const auto batch = sim::simulate_conditioned(c, bramson_centering(t) - a, 10'000'000, 10000);
        EXPECT_EQ(batch.accepted.size(), 10000u);
        verify::ConditionalSuiteInput in;
        in.t = t;
        in.mode = verify::ConditioningMode::Moderate;
        in.a = a;
        double d = -1.0;
        for (const auto& r : verify::conditional_law_suite(field60(), batch, in)) {
            if (r.layer == verify::Layer::Exact) EXPECT_EQ(r.verdict, verify::Verdict::Pass) << r.name << " " << r.empirical;
            if (r.name.ends_with(".limit.tau")) {
                d = r.empirical;
                if (r.verdict == verify::Verdict::Fail) EXPECT_EQ(r.label, "finite-t gap");
            }
        }
        return d;
    };
    const double near = limit_tau(6.0, 2.0, 606), far = limit_tau(10.0, 4.0, 1004);
    ASSERT_GE(near, 0.0);
    EXPECT_LT(far, near);
}

TEST(Probability, AgreesWithTheSolver) {
    const SolutionField f = solve(-30.0, 20.0, 0.01, 0.005, 3.0, 0.5);
    sim::SimConfig c;
    c.horizon = 3.0;
    c.seed = 31;
    const std::uint64_t n = 100'000;
    const auto b = sim::simulate_conditioned(c, 0.0, n);
    const double u0 = f.evaluate(0.0, 3.0).u;
    EXPECT_NEAR(b.acceptance_rate, u0, 3.0 * std::sqrt(u0 * (1.0 - u0) / n));

    const auto p = sim::estimate_probability(c, -1.0, n);
    const double um1 = f.evaluate(-1.0, 3.0).u;
    EXPECT_LE(p.lower, um1);
    EXPECT_GE(p.upper, um1);
    const auto q = sim::estimate_probability(c, -1.0, 2 * n);
    EXPECT_NEAR((q.upper - q.lower) / (p.upper - p.lower), 1.0 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
}

TEST(CliRun, YuleMeanAtThreeAndConstantsTable) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "bbmlab_integration_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "run.ini") << "schema = bbmlab-config/1\n"
                                      "[simulate]\nhorizon = 3\nreplicas = 1000000\nseed = 3\nwrite_batch = no\n"
                                      "[solve]\nscheme = fd\nt_max = 20\nz_min = -80\nz_max = 60\ndz = 0.02\ndt = 0.01\nstore_every = 5\n"
                                      "[wave]\nfield = solve/field.csv\nt = 20\n"
                                      "[constants]\nalphas = 0, -1, -2\nfield = solve/field.csv\nwave = wave/wave.csv\n";
    std::ostringstream out, err;
    auto run = [&](const std::string& cmd) {
        return cli::run({cmd, "--config", (dir / "run.ini").string(), "--out-dir", (dir / cmd).string()}, out, err);
    };
    ASSERT_EQ(run("simulate"), cli::kExitPass) << err.str();
    const auto s = nlohmann::json::parse(io::read_file(dir / "simulate" / "summary.json"));
    EXPECT_NEAR(s["mean_n_t"].get<double>(), std::exp(3.0), 3.0 * s["se_n_t"].get<double>());

    ASSERT_EQ(run("solve"), cli::kExitPass) << err.str();
    ASSERT_EQ(run("wave"), cli::kExitPass) << err.str();
    ASSERT_EQ(run("constants"), cli::kExitPass) << err.str();
    const auto k = nlohmann::json::parse(io::read_file(dir / "constants" / "constants.json"));
    std::vector<double> ratios;
    for (const auto& row : k["rows"]) {
        if (row["alpha"].get<double>() == -1.0) EXPECT_EQ(row["psi"].get<double>(), -2.0);
        if (row.contains("c1") && row.contains("c2") && row["c1"].is_number() && row["c2"].is_number())
            ratios.push_back(row["c2"].get<double>() / row["c1"].get<double>());
    }
    ASSERT_FALSE(ratios.empty());
    for (double r : ratios) EXPECT_DOUBLE_EQ(r, ratios.front());
    fs::remove_all(dir);
}
