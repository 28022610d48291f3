#pragma once

#include <vector>

#include "bbmlab/core/density.hpp"
#include "bbmlab/fkpp/field.hpp"

namespace bbm {

/// Joint density of (tau, X(tau)) = (s, y) on {M_t <= z, tau <= t}:
/// exp(-s) phi(y; s) u(z - y, t - s)^2. Throws Coverage outside the field.
double first_branch_density(const SolutionField& field, double z, double t, double s, double y);

/// log of E[u(z - B_s, t_k)^2] with s = t - t_k, on stored slice k. Each node carries the Gaussian
/// mass of its cell; the mass beyond the right end of the window is counted with u = 1.
double log_branch_expectation(const SolutionField& field, std::size_t k, double z, double s);

struct ConditionalOptions {
    /// Also build the conditional law of X(tau) given tau = s for every s on the grid.
    bool with_position_laws = false;
};

/// Law of the first branching time given {M_t <= z}, from the first-branch decomposition.
struct ConditionalFirstBranch {
    double z = 0.0;
    double t = 0.0;
    double log_u = 0.0;
    /// P(tau > t | M_t <= z) = e^{-t} P(B_t <= z) / u(z, t).
    double atom = 0.0;
    /// Density of tau on (0, t), scaled so that its integral is 1 - atom.
    DensityCurve s_marginal;
    /// Conditional densities of X(tau) given tau = s_marginal.grid()[i] (optional, unit mass).
    std::vector<DensityCurve> position_laws;
    /// Relative mismatch between the quadrature of the joint density and u - e^{-t} P(B_t <= z).
    double identity_residual = 0.0;

    /// P(tau ^ t <= x | M_t <= z).
    double tau_cdf(double x) const;
};

/// Needs stored slices at t and below; s runs over t - t_k for the stored t_k <= t.
/// Throws Precision when u(z, t) < 1e-280 and Coverage when t is not a stored slice.
ConditionalFirstBranch conditional_first_branch(const SolutionField& field, double z, double t,
                                                const ConditionalOptions& options = {});

}  // namespace bbm
