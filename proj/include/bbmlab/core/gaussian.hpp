#pragma once

namespace bbm {

double normal_pdf(double x);

/// Standard normal CDF via erfc, accurate in both tails.
double normal_cdf(double x);

/// log of the standard normal CDF; finite for arbitrarily negative x.
double log_normal_cdf(double x);

/// P(B_t <= z) for a standard Brownian motion, t > 0.
double brownian_cdf(double z, double t);
double log_brownian_cdf(double z, double t);

/// log P(a < B_1 <= b) for a < b, accurate when both ends sit in the same far tail.
double log_normal_interval(double a, double b);

/// log P(B_s in [y - h/2, y + h/2]).
double log_gaussian_cell_mass(double y, double s, double h);

/// Density of N(0, s) at y.
double gaussian_density(double y, double s);

struct TailBounds {
    double lower = 0.0;
    double exact = 0.0;
    double upper = 0.0;
};

/// Mills-ratio sandwich of P(B_1 > z): upper = phi(z)/z, lower = upper (1 - 2/z^2).
TailBounds normal_tail_bounds(double z);

/// Upper bound sqrt(t)/(z sqrt(2 pi)) exp(-z^2 / 2t) on P(B_t > z), z, t > 0.
double brownian_tail_upper(double z, double t);

}  // namespace bbm
