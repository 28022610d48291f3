#pragma once

#include <cstdint>
#include <vector>

#include "bbmlab/fkpp/field.hpp"

namespace bbm::sim {

struct LimitSamplerOptions {
    /// Rejection trials allowed per conditioned BBM before the budget is doubled.
    std::uint64_t initial_budget = 1u << 16;
    /// Cells whose log weight is more than this below the slice maximum are dropped from the table.
    double log_weight_floor = 45.0;
};

struct LimitDraw {
    std::uint64_t index = 0;
    bool atom = false;
    double xi = 0.0;
    double chi = 0.0;
    /// Points of the extremal process, all <= 0.
    std::vector<double> points;
    std::uint64_t rejection_trials = 0;
    unsigned budget_doublings = 0;

    double max() const;
};

/// Sampler of the alpha < -gamma limit extremal process: with probability (-1/alpha)/phi a single
/// point -chi with chi ~ Exp(-sqrt2 alpha); otherwise (xi, chi) from the tabulated density
/// (sqrt2/phi) exp(sqrt2 alpha chi + (1 - alpha^2) s) u(chi, s)^2 and the points of two independent
/// BBMs of length xi, each conditioned on max <= chi by rejection, shifted by -chi.
class LimitExtremalSampler {
public:
    LimitExtremalSampler(double alpha, const SolutionField& field, double phi, const LimitSamplerOptions& options = {});

    LimitDraw draw(std::uint64_t seed, std::uint64_t index) const;

    double atom_probability() const { return atom_probability_; }
    /// Non-atom mass of the table divided by phi; 1 - atom_probability up to quadrature.
    double table_mass() const { return table_mass_; }

private:
    struct SliceTable {
        double s_lo = 0.0;
        double s_hi = 0.0;
        double z0 = 0.0;
        std::vector<double> cumulative;
    };
    double alpha_;
    double phi_;
    double dz_;
    double atom_probability_;
    double table_mass_ = 0.0;
    LimitSamplerOptions options_;
    std::vector<SliceTable> slices_;
    std::vector<double> slice_cumulative_;
};

}  // namespace bbm::sim
