#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "bbmlab/error.hpp"
#include "bbmlab/verify/diagnostics.hpp"
#include "bbmlab/verify/report.hpp"
#include "bbmlab/verify/statistics.hpp"
#include "bbmlab/verify/tolerances.hpp"

using namespace bbm;
using namespace bbm::verify;

namespace {

// sup over a fine grid of |F_n(x) - F(x)| and |F_n(x-) - F(x-)|; brute force.
double ks_brute(std::vector<double> s, const std::function<double(double)>& f) {
    std::sort(s.begin(), s.end());
    const double n = s.size();
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double lo = std::abs(f(s[i]) - static_cast<double>(i) / n);
        const double hi = std::abs(f(s[i]) - static_cast<double>(i + 1) / n);
        d = std::max({d, lo, hi});
    }
    return d;
}

}  // namespace

TEST(Statistics, KsMatchesBruteForce) {
    std::mt19937_64 rng(1);
    std::exponential_distribution<double> e(1.5);
    std::vector<double> s(777);
    for (auto& v : s) v = e(rng);
    auto cdf = [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-1.5 * x); };
    EXPECT_NEAR(ks_statistic(s, cdf), ks_brute(s, cdf), 1e-15);
    auto wrong = [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-3.0 * x); };
    EXPECT_GT(ks_statistic(s, wrong), 0.2);
}

TEST(Statistics, KsHandlesAnAtom) {
    // Half the mass at 1, the rest uniform on (0, 1).
    std::vector<double> s;
    for (int i = 0; i < 500; ++i) s.push_back(1.0);
    for (int i = 0; i < 500; ++i) s.push_back((i + 0.5) / 500.0);
    auto cdf = [](double x) { return x >= 1.0 ? 1.0 : std::max(0.0, 0.5 * x); };
    auto left = [](double x) { return x > 1.0 ? 1.0 : std::max(0.0, 0.5 * std::min(x, 1.0)); };
    EXPECT_LT(ks_statistic(s, cdf, left), 0.002);
    EXPECT_GT(ks_statistic(s, cdf), 0.49);
}

TEST(Statistics, TwoSample) {
    std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
    EXPECT_EQ(ks_two_sample(a, b), 0.0);
    std::vector<double> c{5, 6, 7, 8};
    EXPECT_EQ(ks_two_sample(a, c), 1.0);
    EXPECT_EQ(ks_two_sample(a, c), ks_two_sample(c, a));
}

TEST(Statistics, ChiSquarePValue) {
    // dof 1: p = erfc(sqrt(stat / 2)).
    const std::vector<double> obs{60, 40}, exp{50, 50};
    const auto r = chi_square(obs, exp);
    EXPECT_EQ(r.dof, 1);
    EXPECT_NEAR(r.statistic, 4.0, 1e-12);
    EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(2.0)), 1e-12);
    // dof 2: p = exp(-stat / 2).
    const std::vector<double> o3{30, 40, 30}, e3{40, 30, 30};
    const auto r3 = chi_square(o3, e3);
    EXPECT_EQ(r3.dof, 2);
    EXPECT_NEAR(r3.p_value, std::exp(-0.5 * r3.statistic), 1e-12);
}

TEST(Statistics, ChiSquareMergesSparseBins) {
    const std::vector<double> obs{10, 1, 2, 0, 1}, exp{10, 2, 1, 2, 0.5};
    const auto r = chi_square(obs, exp);
    EXPECT_EQ(r.bins, 2u);
}

TEST(Statistics, Moments) {
    const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8};
    EXPECT_DOUBLE_EQ(mean(x), 2.5);
    EXPECT_DOUBLE_EQ(variance(x), 5.0 / 3.0);
    EXPECT_NEAR(pearson_correlation(x, y), 1.0, 1e-15);
    EXPECT_NEAR(ls_slope(x, y), 2.0, 1e-15);
}

TEST(Report, VerdictIsRecomputable) {
    ComparisonReport r;
    r.empirical = 1.05;
    r.reference = 1.0;
    r.tolerance = 0.1;
    r.comparison = Comparison::Within;
    EXPECT_EQ(judge(r), Verdict::Pass);
    r.empirical = 1.2;
    EXPECT_EQ(judge(r), Verdict::Fail);
    r.comparison = Comparison::AtLeast;
    EXPECT_EQ(judge(r), Verdict::Pass);
    r.comparison = Comparison::Below;
    EXPECT_EQ(judge(r), Verdict::Fail);
    r.comparison = Comparison::AtMost;
    r.samples = 10;
    r.min_samples = 500;
    EXPECT_EQ(judge(r), Verdict::Inconclusive);
    r.comparison = Comparison::Informational;
    r.samples.reset();
    EXPECT_EQ(judge(r), Verdict::Inconclusive);
    r.empirical = NAN;
    r.comparison = Comparison::AtMost;
    EXPECT_EQ(judge(r), Verdict::Fail);
}

TEST(Report, JsonCarriesEveryField) {
    std::vector<ComparisonReport> v(2);
    v[0].name = "b";
    v[0].empirical = INFINITY;
    v[0].comparison = Comparison::AtMost;
    v[0].metadata.runtime_s = 1.5;
    v[1].name = "a";
    v[1].empirical = 0.5;
    v[1].reference = 0.5;
    v[0] = finalize(v[0]);
    v[1] = finalize(v[1]);
    order_by_name(v);
    EXPECT_EQ(v[0].name, "a");
    EXPECT_FALSE(all_pass(v));
    const auto j = nlohmann::json::parse(to_json(v, "unit", "tol/0"));
    EXPECT_EQ(j["suite"], "unit");
    EXPECT_EQ(j["pass"], false);
    EXPECT_EQ(j["reports"][1]["empirical"], "inf");
    EXPECT_EQ(j["reports"][1]["verdict"], "fail");
    EXPECT_TRUE(j["reports"][1]["metadata"].contains("runtime_s"));
    const auto k = nlohmann::json::parse(to_json(v, "unit", "tol/0", false));
    EXPECT_FALSE(k["reports"][1]["metadata"].contains("runtime_s"));
    // Verdicts recomputed from the serialised numbers agree.
    for (const auto& r : j["reports"]) {
        if (!r["empirical"].is_number()) continue;
        ComparisonReport back;
        back.empirical = r["empirical"];
        back.reference = r["reference"];
        back.tolerance = r["tolerance"];
        back.comparison = Comparison::Within;
        EXPECT_EQ(std::string(to_string(judge(back))), r["verdict"].get<std::string>());
    }
    EXPECT_NE(to_text(v).find("a "), std::string::npos);
}

TEST(Tolerances, ManifestIsVersioned) {
    const auto j = nlohmann::json::parse(to_json(default_tolerances()));
    EXPECT_EQ(j["version"], default_tolerances().version);
    EXPECT_EQ(j["ks_exact"], 0.02);
    EXPECT_EQ(j["min_samples"], 500);
}

TEST(Bounds, LargeDeviationBoundPieces) {
    const double t = 30.0, eps = 0.05, beta = 1.5;
    const double g = std::sqrt(2.0) - 1.0;
    EXPECT_EQ(ds_log_bound(1.2, t, eps, beta), 0.0);
    EXPECT_NEAR(ds_log_bound(0.0, t, eps, beta), (-2.0 * g + eps) * t, 1e-12);
    EXPECT_NEAR(ds_log_bound(-1.0, t, eps, beta), (-2.0 + eps) * t, 1e-12);
    EXPECT_NEAR(ds_log_bound(-2.0, t, eps, beta), -4.0 * t, 1e-12);
    // The two middle pieces meet at -gamma.
    EXPECT_NEAR(ds_log_bound(-g, t, eps, beta), ds_log_bound(-g - 1e-12, t, eps, beta), 1e-9);
}
