#pragma once

#include <numbers>

namespace bbm {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kPi = std::numbers::pi;

/// The phase-transition constant sqrt(2) - 1; lower deviations change regime at alpha = -kGamma.
inline constexpr double kGamma = std::numbers::sqrt2 - 1.0;

/// Left-tail exponent of the travelling wave, w(z) ~ C exp(kWaveLeftSlope z) as z -> -inf.
inline constexpr double kWaveLeftSlope = std::numbers::sqrt2 * kGamma;

/// Prefactor exponents of the three lower-deviation regimes.
inline constexpr double kHighPolyExponent = 1.5 * kGamma;
inline constexpr double kLowPolyExponent = -0.5;
inline constexpr double kCriticalPolyExponent = 0.75 * kGamma;

/// Exponent (3 sqrt2 - 1)/4 appearing in the critical-regime constant.
inline constexpr double kCriticalGammaArg = (3.0 * std::numbers::sqrt2 - 1.0) / 4.0;

/// Inputs this close to -kGamma are treated as the critical point.
inline constexpr double kCriticalSnap = 1e-12;

}  // namespace bbm
