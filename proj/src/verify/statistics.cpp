#include "bbmlab/verify/statistics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "bbmlab/error.hpp"

namespace bbm::verify {

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left) {
    if (samples.empty()) fail(ErrorKind::InvalidInput, "ks_statistic needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < samples.size()) {
        // Ties share one jump of the empirical CDF.
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        const double x = samples[i];
        const double f = cdf(x);
        const double f_left = cdf_left ? cdf_left(x) : f;
        d = std::max({d, std::abs(f_left - static_cast<double>(i) / n), std::abs(f - static_cast<double>(j) / n)});
        i = j;
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) fail(ErrorKind::InvalidInput, "ks_two_sample needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

ChiSquare chi_square(std::span<const double> observed, std::span<const double> expected) {
    if (observed.size() != expected.size() || observed.empty()) fail(ErrorKind::InvalidInput, "chi_square needs matching bins");
    std::vector<double> o, e;
    double oa = 0.0, ea = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        oa += observed[i];
        ea += expected[i];
        if (ea >= 5.0) {
            o.push_back(oa);
            e.push_back(ea);
            oa = ea = 0.0;
        }
    }
    if (ea > 0.0 || oa > 0.0) {
        if (e.empty()) {
            o.push_back(oa);
            e.push_back(ea);
        } else {
            o.back() += oa;
            e.back() += ea;
        }
    }
    ChiSquare r;
    r.bins = o.size();
    if (r.bins < 2) fail(ErrorKind::InvalidInput, "chi_square needs at least two bins after merging");
    for (std::size_t i = 0; i < o.size(); ++i) r.statistic += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
    r.dof = static_cast<int>(r.bins) - 1;
    r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
    return r;
}

double mean(std::span<const double> x) {
    if (x.empty()) fail(ErrorKind::InvalidInput, "mean of an empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) fail(ErrorKind::InvalidInput, "variance needs two samples");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::InvalidInput, "correlation needs paired samples");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::InvalidInput, "ls_slope needs two paired points");
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace bbm::verify
