#include "bbmlab/core/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

WaveMassFunction::WaveMassFunction(const WaveProfile& wave, bool bramson_frame) {
    const double shift = bramson_frame && wave.bramson_offset ? *wave.bramson_offset : 0.0;
    const double k = kWaveLeftSlope;
    z_.resize(wave.z.size());
    g_.resize(wave.z.size());
    cumul_.resize(wave.z.size());
    for (std::size_t i = 0; i < z_.size(); ++i) {
        z_[i] = wave.z[i] + shift;
        g_[i] = std::exp(-k * z_[i] + 2.0 * wave.logw[i]);
    }
    cumul_[0] = g_[0] / k;
    for (std::size_t i = 1; i < z_.size(); ++i) cumul_[i] = cumul_[i - 1] + 0.5 * (z_[i] - z_[i - 1]) * (g_[i] + g_[i - 1]);
}

double WaveMassFunction::operator()(double x) const {
    const double k = kWaveLeftSlope;
    if (x == kInf) return total();
    if (x <= z_.front()) return g_.front() / k * std::exp(k * (x - z_.front()));
    if (x >= z_.back()) return cumul_.back() + (std::exp(-k * z_.back()) - std::exp(-k * x)) / k;
    auto it = std::upper_bound(z_.begin(), z_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - z_.begin());
    const double f = (x - z_[i - 1]) / (z_[i] - z_[i - 1]);
    const double gx = g_[i - 1] + f * (g_[i] - g_[i - 1]);
    return cumul_[i - 1] + 0.5 * (x - z_[i - 1]) * (gx + g_[i - 1]);
}

double WaveMassFunction::total() const { return cumul_.back() + std::exp(-kWaveLeftSlope * z_.back()) / kWaveLeftSlope; }

double limit_joint_cdf_high(double x1, double x2, double x3, const WaveProfile& wave, double c1) {
    if (!(x3 >= 0.0)) fail(ErrorKind::Domain, "limit_joint_cdf_high needs x3 >= 0");
    if (!(c1 > 0.0)) fail(ErrorKind::Domain, "c1 must be positive");
    const WaveMassFunction mass(wave);
    const double gauss = x1 == kInf ? 1.0 : normal_cdf(x1);
    const double upper = x2 == kInf ? kInf : x2 - x3;
    return gauss * std::exp(-kWaveLeftSlope * x3) * mass(upper) / (2.0 * c1);
}

double limit_joint_cdf_low(double x1, double x2, double x3, double alpha, const SolutionField& field, double phi) {
    if (!(alpha < -kGamma)) fail(ErrorKind::Regime, "limit_joint_cdf_low needs alpha < -gamma");
    if (!(x1 >= 0.0) || !(x3 >= 0.0)) fail(ErrorKind::Domain, "x1 and x3 must be non-negative");
    if (!(phi > 0.0)) fail(ErrorKind::Domain, "phi must be positive");
    const double c = kSqrt2 * alpha;
    const double growth = 1.0 - alpha * alpha;

    // No-branch part: int_{x3}^{x2} sqrt2 e^{c z} dz.
    double atom = 0.0;
    if (x3 < x2) atom = (std::exp(c * x2) - std::exp(c * x3)) / alpha;

    const double upper = x2 == kInf ? kInf : x2 - x3;
    const double s_end = std::min(x1, field.times().back());
    if (x1 != kInf && x1 > field.times().back() + 1e-9) fail(ErrorKind::Coverage, "x1 beyond the field's time range");
    const double dz = field.grid().dz;

    std::vector<double> s_grid;
    std::vector<double> j;
    for (std::size_t k = 0; k < field.slices(); ++k) {
        const double s = field.time(k);
        if (s > s_end + 1e-12) break;
        const auto row = field.logu(k);
        double acc = 0.0;
        for (std::size_t i = 1; i < row.size(); ++i) {
            const double za = field.z_at(k, i - 1);
            if (za >= upper) break;
            const double zb = std::min(field.z_at(k, i), upper);
            const double fa = row[i - 1] == kNegInf ? 0.0 : std::exp(c * (x3 + za) + 2.0 * row[i - 1] + growth * s);
            double lb = row[i];
            if (zb < field.z_at(k, i)) lb = row[i - 1] + (row[i] - row[i - 1]) * (zb - za) / dz;
            const double fb = lb == kNegInf || std::isnan(lb) ? 0.0 : std::exp(c * (x3 + zb) + 2.0 * lb + growth * s);
            acc += 0.5 * (zb - za) * (fa + fb);
        }
        if (upper > field.z_hi(k)) {
            // u = 1 beyond the window.
            const double hi = upper == kInf ? kNegInf : c * (x3 + upper);
            acc += std::exp(growth * s) * (std::exp(c * (x3 + field.z_hi(k))) - std::exp(hi)) / (-c);
        }
        s_grid.push_back(s);
        j.push_back(acc);
    }
    double integral = 0.0;
    if (s_grid.size() >= 2) {
        const double h = s_grid[1];
        const double b = (j[1] - j[0]) / std::sqrt(h);
        integral += j[0] * h + (2.0 / 3.0) * b * h * std::sqrt(h);
        for (std::size_t i = 2; i < s_grid.size(); ++i) integral += 0.5 * (s_grid[i] - s_grid[i - 1]) * (j[i] + j[i - 1]);
        // Partial last interval when x1 falls between stored slices.
        if (x1 != kInf && s_end > s_grid.back()) {
            integral += (s_end - s_grid.back()) * j.back();
        }
    }
    return (atom + kSqrt2 * integral) / phi;
}

DensityCurve xi_critical_density(std::vector<double> grid) {
    if (grid.empty() || !(grid.front() > 0.0)) fail(ErrorKind::Domain, "xi_critical_density needs positive abscissae");
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        v[i] = std::exp(kHighPolyExponent * std::log(u) - 2.0 * u * u);
    }
    return DensityCurve(std::move(grid), std::move(v)).normalized();
}

}  // namespace bbm
