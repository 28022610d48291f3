#pragma once

#include <span>

namespace bbm {

/// Trapezoid integral of samples on a (possibly non-uniform) strictly increasing grid.
double trapezoid(std::span<const double> x, std::span<const double> y);

/// Trapezoid on a uniform grid with spacing h.
double trapezoid_uniform(std::span<const double> y, double h);

/// log of the trapezoid integral of exp(log_y) on a uniform grid; -inf when every sample is zero.
double log_trapezoid_uniform(std::span<const double> log_y, double h);

/// log(sum exp(v)).
double log_sum_exp(std::span<const double> v);

}  // namespace bbm
