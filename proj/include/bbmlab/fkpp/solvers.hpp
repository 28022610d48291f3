#pragma once

#include <cstddef>

#include "bbmlab/fkpp/field.hpp"

namespace bbm {

struct FdOptions {
    /// Disable the reaction term (pure heat equation); test hook.
    bool reaction = true;
    /// Leading steps whose diffusion is two backward-Euler half steps (Rannacher start-up).
    std::size_t rannacher_steps = 4;
    /// Store every n-th step (the final step is always stored).
    std::size_t store_every = 1;
    /// Absolute slack for the monotonicity and range guards.
    double guard_tol = 1e-12;
    /// Width of the moving window; ignored for fixed windows.
    double moving_width = 60.0;
};

/// Strang-split Crank-Nicolson solver: half logistic reaction (closed form, log domain),
/// full CN diffusion with Dirichlet 0 / 1 ends, half reaction.
SolutionField solve_fd(const SpaceTimeGrid& grid, const InitialCondition& initial, const FdOptions& options = {});

struct DuhamelOptions {
    std::size_t store_every = 1;
    /// Gaussian kernel half-width in units of sqrt(dt).
    double kernel_halfwidth = 8.0;
    /// Abort when any value exceeds 1 by more than this.
    double overshoot_tol = 1e-10;
};

/// Time marching of the first-branching integral equation
///   u(z,t) = e^{-t} P(B_t <= z) + int_0^t e^{-s} E[u(z - B_s, t - s)^2] ds
/// for Heaviside initial data on a fixed window.
SolutionField solve_duhamel(const SpaceTimeGrid& grid, const DuhamelOptions& options = {});

/// Coefficients of the product trapezoid rule on [0, h] for int e^{-x} g(x) dx with g linear:
/// near * g(0) + far * g(h).
struct ExpTrapezoidWeights {
    double near = 0.0;
    double far = 0.0;
};
ExpTrapezoidWeights exp_trapezoid_weights(double h);

}  // namespace bbm
