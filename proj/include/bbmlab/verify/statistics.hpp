#pragma once

#include <functional>
#include <span>
#include <vector>

namespace bbm::verify {

/// One-sample Kolmogorov-Smirnov distance sup |F_n - F|. `cdf_left` gives F(x-) and is needed
/// only when F has atoms; without it F is taken continuous.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf,
                    const std::function<double(double)>& cdf_left = {});

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquare {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    /// Bins after merging neighbours until each expects at least 5.
    std::size_t bins = 0;
};

/// Pearson goodness of fit. `expected` holds counts on the same bins and is merged from the right
/// while a bin expects fewer than 5; dof = bins - 1.
ChiSquare chi_square(std::span<const double> observed, std::span<const double> expected);

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of y on x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace bbm::verify
