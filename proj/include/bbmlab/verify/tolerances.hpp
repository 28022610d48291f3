#pragma once

#include <cstdint>
#include <string>

namespace bbm::verify {

/// Every acceptance band used by the checks. Bump `version` whenever a value changes.
struct Tolerances {
    std::string version = "bbmlab-tolerances/1";

    double cross_scheme = 1e-3;
    double sigma_multiple = 3.0;
    double ks_exact = 0.02;
    double ks_line = 0.01;
    double ks_limit_low = 0.1;
    double ks_moderate_tau = 0.15;
    double ks_limit_sampler = 0.02;
    std::uint64_t min_samples = 500;
    double chi_square_p = 0.01;

    double wave_residual = 1e-3;
    double wave_left_slope = 0.05;
    double c1_refinement = 0.01;
    double c2_ratio = 1e-6;
    double phi_truncation = 1e-3;

    double exponent_slope = 0.03;
    double ratio_lo = 0.5;
    double ratio_hi = 2.0;
    double low_ratio_lo = 0.8;
    double low_ratio_hi = 1.25;
    double u1_share_rel = 0.1;
    double near_critical_factor = 2.0;

    double moderate_lo = 0.7;
    double moderate_hi = 1.4;
    double moderate_slope = 0.05;

    double critical_l1 = 0.1;

    double ds_epsilon = 0.05;
    double ch_delta = 0.2;
    double ch_stability = 0.5;
};

const Tolerances& default_tolerances();

std::string to_json(const Tolerances& t);

}  // namespace bbm::verify
