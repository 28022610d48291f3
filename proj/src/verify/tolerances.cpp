#include "bbmlab/verify/tolerances.hpp"

#include <nlohmann/json.hpp>

namespace bbm::verify {

const Tolerances& default_tolerances() {
    static const Tolerances t;
    return t;
}

std::string to_json(const Tolerances& t) {
    nlohmann::ordered_json j;
    j["version"] = t.version;
    j["cross_scheme"] = t.cross_scheme;
    j["sigma_multiple"] = t.sigma_multiple;
    j["ks_exact"] = t.ks_exact;
    j["ks_line"] = t.ks_line;
    j["ks_limit_low"] = t.ks_limit_low;
    j["ks_moderate_tau"] = t.ks_moderate_tau;
    j["ks_limit_sampler"] = t.ks_limit_sampler;
    j["min_samples"] = t.min_samples;
    j["chi_square_p"] = t.chi_square_p;
    j["wave_residual"] = t.wave_residual;
    j["wave_left_slope"] = t.wave_left_slope;
    j["c1_refinement"] = t.c1_refinement;
    j["c2_ratio"] = t.c2_ratio;
    j["phi_truncation"] = t.phi_truncation;
    j["exponent_slope"] = t.exponent_slope;
    j["ratio_band"] = {t.ratio_lo, t.ratio_hi};
    j["low_ratio_band"] = {t.low_ratio_lo, t.low_ratio_hi};
    j["u1_share_rel"] = t.u1_share_rel;
    j["near_critical_factor"] = t.near_critical_factor;
    j["moderate_band"] = {t.moderate_lo, t.moderate_hi};
    j["moderate_slope"] = t.moderate_slope;
    j["critical_l1"] = t.critical_l1;
    j["ds_epsilon"] = t.ds_epsilon;
    j["ch_delta"] = t.ch_delta;
    j["ch_stability"] = t.ch_stability;
    return j.dump(2) + "\n";
}

}  // namespace bbm::verify
