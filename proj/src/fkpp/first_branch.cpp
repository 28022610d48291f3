#include "bbmlab/fkpp/first_branch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/core/quadrature.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPrecisionFloor = -644.72;  // log(1e-280)
}  // namespace

double first_branch_density(const SolutionField& field, double z, double t, double s, double y) {
    if (!(s > 0.0 && s < t)) fail(ErrorKind::Domain, "first_branch_density needs 0 < s < t");
    const FieldSample u = field.evaluate(z - y, t - s);
    if (u.u == 0.0) return 0.0;
    return std::exp(-s + 2.0 * u.logu) * gaussian_density(y, s);
}

double log_branch_expectation(const SolutionField& field, std::size_t k, double z, double s) {
    const auto row = field.logu(k);
    const double dz = field.grid().dz;
    if (s == 0.0) return 2.0 * field.evaluate_slice(k, z).logu;
    std::vector<double> terms;
    terms.reserve(row.size() + 1);
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == kNegInf) continue;
        const double y = z - field.z_at(k, j);
        terms.push_back(log_gaussian_cell_mass(y, s, dz) + 2.0 * row[j]);
    }
    // Beyond the right end u = 1: P(B_s < z - z_hi - dz/2).
    const double y_last = z - field.z_hi(k) - 0.5 * dz;
    terms.push_back(log_normal_cdf(y_last / std::sqrt(s)));
    return log_sum_exp(terms);
}

double ConditionalFirstBranch::tau_cdf(double x) const {
    if (x >= t) return 1.0;
    if (x <= 0.0) return 0.0;
    return s_marginal.cumulative(x);
}

ConditionalFirstBranch conditional_first_branch(const SolutionField& field, double z, double t,
                                                const ConditionalOptions& options) {
    const std::size_t kt = field.find_slice(t);
    if (kt == SolutionField::npos) fail(ErrorKind::Coverage, "conditional_first_branch needs a stored slice at t");
    ConditionalFirstBranch out;
    out.z = z;
    out.t = t;
    out.log_u = field.evaluate_slice(kt, z).logu;
    if (out.log_u < kPrecisionFloor) {
        std::ostringstream why;
        why << "u(" << z << ", " << t << ") is below 1e-280; use a wider log-domain window or the asymptotic mode";
        fail(ErrorKind::Precision, why.str());
    }
    const double log_u1 = -t + log_brownian_cdf(z, t);
    out.atom = std::exp(log_u1 - out.log_u);

    // s grid ascending: s = t - t_k for k = kt down to 0.
    std::vector<double> s_grid;
    std::vector<double> log_f;
    for (std::size_t k = kt + 1; k-- > 0;) {
        const double s = t - field.time(k);
        s_grid.push_back(s);
        log_f.push_back(-s + log_branch_expectation(field, k, z, s) - out.log_u);
    }
    std::vector<double> f(log_f.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(log_f[i]);
    const double mass = trapezoid(s_grid, f);
    const double target = 1.0 - out.atom;
    out.identity_residual = std::abs(mass - target) / target;
    for (double& v : f) v *= target / mass;
    out.s_marginal = DensityCurve(s_grid, std::move(f));

    if (options.with_position_laws) {
        const double dz = field.grid().dz;
        for (std::size_t i = 0; i < s_grid.size(); ++i) {
            const std::size_t k = kt - i;
            const double s = s_grid[i];
            const auto row = field.logu(k);
            std::vector<double> ys;
            std::vector<double> vs;
            if (s == 0.0) {
                // Degenerate Gaussian: X(tau) = 0. Represent as a narrow hat of unit mass.
                ys = {-dz, 0.0, dz};
                vs = {0.0, 1.0 / dz, 0.0};
            } else {
                const double log_e = log_f[i] + s + out.log_u;  // log E[u(z - B_s, t - s)^2]
                for (std::size_t j = row.size(); j-- > 0;) {
                    ys.push_back(z - field.z_at(k, j));
                    const double l = row[j] == kNegInf ? kNegInf
                                                       : log_gaussian_cell_mass(ys.back(), s, dz) + 2.0 * row[j];
                    vs.push_back(l == kNegInf ? 0.0 : std::exp(l - log_e) / dz);
                }
            }
            DensityCurve c(std::move(ys), std::move(vs));
            out.position_laws.push_back(c.normalization() > 0.0 ? c.normalized() : c);
        }
    }
    return out;
}

}  // namespace bbm
