#include "bbmlab/core/gaussian.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

namespace {
constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
constexpr double kLogSqrt2Pi = 0.918938533204672741780329736406;
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double log_normal_cdf(double x) {
    if (x > -20.0) {
        return std::log(normal_cdf(x));
    }
    // Asymptotic Mills-ratio series; at x <= -20 the truncation is below 1e-13 relative.
    const double r = 1.0 / (x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 6; ++k) {
        term *= -(2.0 * k - 1.0) * r;
        sum += term;
    }
    return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log(sum);
}

double brownian_cdf(double z, double t) { return normal_cdf(z / std::sqrt(t)); }

double log_brownian_cdf(double z, double t) { return log_normal_cdf(z / std::sqrt(t)); }

double log_normal_interval(double a, double b) {
    if (!(a < b)) return -std::numeric_limits<double>::infinity();
    if (b <= 0.0) {
        // both in the lower tail: log Phi(b) + log(1 - Phi(a)/Phi(b))
        const double lb = log_normal_cdf(b);
        return lb + std::log(-std::expm1(log_normal_cdf(a) - lb));
    }
    if (a >= 0.0) return log_normal_interval(-b, -a);
    return std::log(normal_cdf(b) - normal_cdf(a));
}

double log_gaussian_cell_mass(double y, double s, double h) {
    const double r = std::sqrt(s);
    return log_normal_interval((y - 0.5 * h) / r, (y + 0.5 * h) / r);
}

double gaussian_density(double y, double s) {
    return kInvSqrt2Pi / std::sqrt(s) * std::exp(-0.5 * y * y / s);
}

TailBounds normal_tail_bounds(double z) {
    if (!(z > 0.0)) {
        fail(ErrorKind::Domain, "normal_tail_bounds needs z > 0, got " + std::to_string(z));
    }
    TailBounds b;
    b.upper = normal_pdf(z) / z;
    b.lower = b.upper * (1.0 - 2.0 / (z * z));
    b.exact = 0.5 * std::erfc(z / kSqrt2);
    return b;
}

double brownian_tail_upper(double z, double t) {
    if (!(z > 0.0) || !(t > 0.0)) {
        fail(ErrorKind::Domain, "brownian_tail_upper needs z, t > 0");
    }
    return std::sqrt(t) / z * kInvSqrt2Pi * std::exp(-0.5 * z * z / t);
}

}  // namespace bbm
