#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <spdlog/spdlog.h>

#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/error.hpp"
#include "bbmlab/fkpp/solvers.hpp"
#include "bbmlab/simd/kernels.hpp"

namespace bbm {

ExpTrapezoidWeights exp_trapezoid_weights(double h) {
    // int_0^h e^{-x} dx and int_0^h x e^{-x} dx.
    const double e1 = -std::expm1(-h);
    const double e2 = e1 - h * std::exp(-h);
    ExpTrapezoidWeights w;
    w.far = e2 / h;
    w.near = e1 - w.far;
    return w;
}

SolutionField solve_duhamel(const SpaceTimeGrid& grid, const DuhamelOptions& options) {
    grid.validate();
    if (grid.window_policy != WindowPolicy::Fixed) {
        fail(ErrorKind::Configuration, "the Duhamel scheme runs on fixed windows only");
    }
    if (options.store_every == 0) fail(ErrorKind::InvalidInput, "store_every must be >= 1");
    if (grid.dz > 0.5 * std::sqrt(grid.dt)) {
        spdlog::warn("duhamel: dz = {} under-resolves the one-step kernel (sqrt(dt) = {})", grid.dz,
                     std::sqrt(grid.dt));
    }
    simd::FlushDenormals ftz;

    const std::size_t n = grid.nodes();
    const std::size_t steps = grid.steps();
    const double dz = grid.dz;
    const double dt = grid.dt;

    // One-step kernel G_dt sampled on the grid and normalised to unit mass; repeated correlation
    // composes it into G_s for every earlier slice (G_{s + dt} = G_dt * G_s).
    const std::size_t half = static_cast<std::size_t>(std::ceil(options.kernel_halfwidth * std::sqrt(dt) / dz));
    std::vector<double> taps(2 * half + 1);
    double mass = 0.0;
    for (std::size_t m = 0; m < taps.size(); ++m) {
        const double y = (static_cast<double>(m) - static_cast<double>(half)) * dz;
        taps[m] = std::exp(-0.5 * y * y / dt);
        mass += taps[m];
    }
    for (double& w : taps) w /= mass;

    const ExpTrapezoidWeights wt = exp_trapezoid_weights(dt);
    const double mid = wt.near + wt.far * std::exp(dt);  // weight of interior slices, times e^{-s}
    const double end_factor = 1.0 + wt.far * std::exp(dt);  // U1 plus the s = t endpoint
    const double decay = std::exp(-dt);

    SolutionField field(grid, Scheme::Duhamel, n);
    std::vector<double> z(n);
    std::vector<double> logu(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = grid.z_min + static_cast<double>(i) * dz;
        logu[i] = z[i] > 0.0 ? 0.0 : (z[i] == 0.0 ? std::log(0.5) : -std::numeric_limits<double>::infinity());
    }
    field.append_slice(0.0, grid.z_min, logu);

    // hist_u = sum_{k>=1} e^{-s_k} G_{s_k} * v_{n-k} with v = u^2, and hist_w the same for 1 - u^2.
    // The complement recursion solves w = e^{-t} P(B_t > z) + int e^{-s} G_s * (w (2 - w)) ds, which
    // is the same equation written for w = 1 - u; u = 1 is unstable, so the right tail must carry
    // w with relative precision or rounding noise grows like e^t.
    std::vector<double> hist_u(n, 0.0);
    std::vector<double> hist_w(n, 0.0);
    std::vector<double> v_u(n, 0.0);
    std::vector<double> v_w(n, 0.0);
    std::vector<double> padded(n + 2 * half, 0.0);
    double far_left_w = 0.0;  // hist_w beyond the left end (u = 0 there)
    double far_right_u = 0.0;  // hist_u beyond the right end (u = 1 there)
    bool have_v = false;

    auto advance = [&](std::vector<double>& hist, const std::vector<double>& v, double left, double right) {
        for (std::size_t i = 0; i < half; ++i) padded[i] = left;
        for (std::size_t i = 0; i < n; ++i) padded[half + i] = hist[i] + v[i];
        for (std::size_t i = 0; i < half; ++i) padded[half + n + i] = right;
        simd::correlate(padded, taps, hist);
        for (double& h : hist) h *= decay;
    };

    const double a = wt.near;
    const double b = 1.0 - 2.0 * a;
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        if (have_v) {
            advance(hist_u, v_u, 0.0, far_right_u + 1.0);
            advance(hist_w, v_w, far_left_w + 1.0, 0.0);
            far_right_u = decay * (far_right_u + 1.0);
            far_left_w = decay * (far_left_w + 1.0);
        }

        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double lp = log_brownian_cdf(z[i], t);
            // a u^2 - u + r = 0, root continuous at r = 0.
            const double r_u = end_factor * std::exp(lp - t) + mid * hist_u[i];
            const double disc = 1.0 - 4.0 * a * r_u;
            double u = 2.0 * r_u / (1.0 + std::sqrt(disc > 0.0 ? disc : 0.0));
            if (u > 0.5) {
                // Same equation for w = 1 - u: a w^2 + b w - r = 0.
                const double tail = -std::expm1(lp);  // P(B_t > z)
                const double r = end_factor * std::exp(-t) * tail + mid * hist_w[i];
                const double wv = 2.0 * r / (b + std::sqrt(b * b + 4.0 * a * r));
                worst = std::max(worst, -wv);
                const double c = std::max(wv, 0.0);
                u = 1.0 - c;
                v_u[i] = u * u;
                v_w[i] = c * (2.0 - c);
                logu[i] = std::log1p(-c);
                continue;
            }
            v_u[i] = u * u;
            v_w[i] = 1.0 - v_u[i];
            logu[i] = u > 0.0 ? std::log(u) : -std::numeric_limits<double>::infinity();
        }
        if (worst > options.overshoot_tol) {
            std::ostringstream why;
            why << "slice at t = " << t << " exceeds 1 by " << worst;
            fail(ErrorKind::Scheme, why.str());
        }
        have_v = true;
        if (step % options.store_every == 0 || step == steps) field.append_slice(t, grid.z_min, logu);
    }
    return field;
}

}  // namespace bbm
