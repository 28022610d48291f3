#pragma once

#include <vector>

#include "bbmlab/core/density.hpp"
#include "bbmlab/fkpp/field.hpp"
#include "bbmlab/fkpp/wave.hpp"

namespace bbm {

/// x -> int_{-inf}^x exp(-sqrt2 gamma z) w_B(z)^2 dz for a wave in its Bramson frame (or the median
/// frame when the wave has no offset or `bramson_frame` is false). Tails as in c1_from_wave.
class WaveMassFunction {
public:
    WaveMassFunction(const WaveProfile& wave, bool bramson_frame = true);
    double operator()(double x) const;
    double total() const;

private:
    std::vector<double> z_;       // Bramson-frame abscissae
    std::vector<double> g_;       // integrand on z_
    std::vector<double> cumul_;   // integral up to z_[i], left tail included
};

/// P(xi <= x1, chi <= x2, E >= x3) for the high-regime limit law; x3 >= 0.
double limit_joint_cdf_high(double x1, double x2, double x3, const WaveProfile& wave, double c1);

/// P(xi_a <= x1, chi_a <= x2, E_a >= x3) for alpha < -gamma; x1, x3 >= 0; infinities allowed.
double limit_joint_cdf_low(double x1, double x2, double x3, double alpha, const SolutionField& field, double phi);

/// Curve proportional to u^{3 gamma/2} exp(-2 u^2) on the given positive grid, unit mass by trapezoid.
DensityCurve xi_critical_density(std::vector<double> grid);

}  // namespace bbm
