#pragma once

#include <optional>
#include <vector>

#include "bbmlab/fkpp/field.hpp"
#include "bbmlab/fkpp/wave.hpp"
#include "bbmlab/sim/bbm.hpp"
#include "bbmlab/verify/report.hpp"
#include "bbmlab/verify/tolerances.hpp"

namespace bbm::verify {

enum class ConditioningMode {
    /// Threshold sqrt2 alpha t.
    Deviation,
    /// Threshold m_t - a.
    Moderate,
};

struct ConditionalSuiteInput {
    double t = 0.0;
    ConditioningMode mode = ConditioningMode::Deviation;
    double alpha = 0.0;
    double a = 0.0;
    /// Limit-law inputs; the checks that need a missing one are skipped.
    std::optional<double> phi;
    std::optional<double> c1;
    const WaveProfile* wave = nullptr;
    std::optional<std::uint64_t> seed;
};

/// Exact layer: KS of tau ^ t, X(tau ^ t) and M_t against the first-branch laws of the field at the
/// same t, and the no-branch fraction against the atom within sigma_multiple standard errors.
/// Asymptotic layer: regime-appropriate standardized marginals against their limit laws.
/// Structural layer: correlation of standardized tau and M_t (reported unjudged).
/// Fewer than min_samples accepted realizations make every statistic inconclusive.
std::vector<ComparisonReport> conditional_law_suite(const SolutionField& field, const sim::ConditionedBatch& batch,
                                                    const ConditionalSuiteInput& input,
                                                    const Tolerances& tol = default_tolerances());

/// KS distance of sqrt2 alpha t - M_t against Exp(-sqrt2 alpha).
double exponential_gap_ks(const sim::ConditionedBatch& batch, double alpha, double t);

}  // namespace bbm::verify
