#include "bbmlab/core/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bbmlab/error.hpp"

namespace bbm {

double trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        fail(ErrorKind::InvalidInput, "trapezoid: abscissae and ordinates differ in length");
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
    }
    return acc;
}

double trapezoid_uniform(std::span<const double> y, double h) {
    if (y.size() < 2) return 0.0;
    double acc = 0.5 * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
    return acc * h;
}

double log_sum_exp(std::span<const double> v) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    double peak = kNegInf;
    for (double x : v) peak = std::max(peak, x);
    if (peak == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - peak);
    return peak + std::log(acc);
}

double log_trapezoid_uniform(std::span<const double> log_y, double h) {
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (log_y.size() < 2) return kNegInf;
    double peak = kNegInf;
    for (double x : log_y) peak = std::max(peak, x);
    if (peak == kNegInf) return kNegInf;
    double acc = 0.5 * (std::exp(log_y.front() - peak) + std::exp(log_y.back() - peak));
    for (std::size_t i = 1; i + 1 < log_y.size(); ++i) acc += std::exp(log_y[i] - peak);
    return peak + std::log(acc * h);
}

}  // namespace bbm
