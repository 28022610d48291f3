#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <spdlog/spdlog.h>

#include "bbmlab/error.hpp"
#include "bbmlab/fkpp/solvers.hpp"
#include "bbmlab/simd/kernels.hpp"

namespace bbm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Exact flow of u' = -u (1 - u) over time h, applied to log u. Above u = 1/2 the update is
/// written through w = 1 - u so that tiny complements keep their relative precision.
void logistic_half_step(std::vector<double>& logu, double h) {
    const double em1 = std::expm1(-h);
    const double ep1 = std::expm1(h);
    for (double& l : logu) {
        if (l == kNegInf) continue;
        if (l < -std::numbers::ln2) {
            l = l - h - std::log1p(std::exp(l) * em1);
        } else {
            l = l - std::log1p(-std::expm1(l) * ep1);
        }
        if (l > 0.0) l = 0.0;
    }
}

/// Constant-coefficient tridiagonal system (-off, diag, -off), factored once.
class TridiagonalSolver {
public:
    TridiagonalSolver(std::size_t n, double diag, double off) : cp_(n), inv_(n), off_(off) {
        double denom = diag;
        inv_[0] = 1.0 / denom;
        cp_[0] = -off * inv_[0];
        for (std::size_t i = 1; i < n; ++i) {
            denom = diag + off * cp_[i - 1];
            inv_[i] = 1.0 / denom;
            cp_[i] = -off * inv_[i];
        }
    }

    /// Solves in place: rhs becomes the solution.
    void solve(std::span<double> rhs) const {
        const std::size_t n = rhs.size();
        rhs[0] *= inv_[0];
        for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] + off_ * rhs[i - 1]) * inv_[i];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp_[i] * rhs[i + 1];
    }

private:
    std::vector<double> cp_;
    std::vector<double> inv_;
    double off_;
};

}  // namespace

SolutionField solve_fd(const SpaceTimeGrid& grid, const InitialCondition& initial, const FdOptions& options) {
    grid.validate();
    if (options.store_every == 0) fail(ErrorKind::InvalidInput, "store_every must be >= 1");
    const double ratio = grid.dz * grid.dz / grid.dt;
    if (ratio < 0.1 || ratio > 10.0) {
        spdlog::warn("fd: dz^2/dt = {:.3g} outside [0.1, 10]; accuracy relies on the Rannacher start-up", ratio);
    }
    simd::FlushDenormals ftz;

    const std::size_t n = grid.nodes();
    const std::size_t steps = grid.steps();
    const double dz = grid.dz;
    const double dt = grid.dt;
    const double kappa = dt / (2.0 * dz * dz);

    SolutionField field(grid, Scheme::Fd, n);
    double origin = grid.z_min;

    std::vector<double> logu(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = initial.at(origin + static_cast<double>(i) * dz, dz);
        if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::InvalidInput, "initial data must lie in [0, 1]");
        logu[i] = v > 0.0 ? std::log(v) : kNegInf;
    }
    // Dirichlet ends.
    logu.front() = kNegInf;
    logu.back() = 0.0;
    field.append_slice(0.0, origin, logu);

    // Diffusion is linear, so it is applied to u and to w = 1 - u separately; each node then keeps
    // whichever of the two is below 1/2. This preserves relative accuracy in both tails.
    const std::size_t interior = n - 2;
    const TridiagonalSolver implicit(interior, 1.0 + kappa, 0.5 * kappa);
    std::vector<double> u(n);
    std::vector<double> w(n);
    std::vector<double> rhs_u(interior);
    std::vector<double> rhs_w(interior);
    double shift_acc = 0.0;

    auto implicit_half = [&](std::vector<double>& x, std::vector<double>& rhs) {
        std::copy(x.begin() + 1, x.end() - 1, rhs.begin());
        rhs.front() += 0.5 * kappa * x.front();
        rhs.back() += 0.5 * kappa * x.back();
        implicit.solve(rhs);
        std::copy(rhs.begin(), rhs.end(), x.begin() + 1);
    };
    auto crank_nicolson = [&](std::vector<double>& x, std::vector<double>& rhs) {
        simd::three_point(x, 0.5 * kappa, 1.0 - kappa, rhs);
        rhs.front() += 0.5 * kappa * x.front();
        rhs.back() += 0.5 * kappa * x.back();
        implicit.solve(rhs);
        std::copy(rhs.begin(), rhs.end(), x.begin() + 1);
    };
    auto scheme_error = [&](const char* what, double by, std::size_t i, std::size_t step) {
        std::ostringstream why;
        why << what << " " << by << " at z = " << origin + static_cast<double>(i) * dz
            << ", t = " << static_cast<double>(step) * dt;
        fail(ErrorKind::Scheme, why.str());
    };

    for (std::size_t step = 1; step <= steps; ++step) {
        if (options.reaction) logistic_half_step(logu, 0.5 * dt);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = std::exp(logu[i]);
            w[i] = -std::expm1(logu[i]);
        }

        if (step <= options.rannacher_steps) {
            for (int half = 0; half < 2; ++half) {
                implicit_half(u, rhs_u);
                implicit_half(w, rhs_w);
            }
        } else {
            crank_nicolson(u, rhs_u);
            crank_nicolson(w, rhs_w);
        }

        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (u[i] < -options.guard_tol) scheme_error("negative value", u[i], i, step);
            if (w[i] < -options.guard_tol) scheme_error("value above 1 by", -w[i], i, step);
            double cur;
            if (u[i] <= 0.5) {
                cur = std::max(u[i], 0.0);
                logu[i] = cur > 0.0 ? std::log(cur) : kNegInf;
            } else {
                const double c = std::max(w[i], 0.0);
                cur = 1.0 - c;
                logu[i] = std::log1p(-c);
            }
            if (initial.cdf_mode && i > 0 && cur < prev - options.guard_tol) {
                scheme_error("monotonicity lost by", prev - cur, i, step);
            }
            prev = cur;
        }
        if (options.reaction) logistic_half_step(logu, 0.5 * dt);

        if (grid.window_policy == WindowPolicy::MovingWithFront) {
            shift_acc += std::sqrt(2.0) * dt;
            while (shift_acc >= dz) {
                std::copy(logu.begin() + 1, logu.end(), logu.begin());
                logu.back() = 0.0;
                logu.front() = kNegInf;
                origin += dz;
                shift_acc -= dz;
            }
        }

        if (step % options.store_every == 0 || step == steps) {
            field.append_slice(static_cast<double>(step) * dt, origin, logu);
        }
    }
    return field;
}

}  // namespace bbm
