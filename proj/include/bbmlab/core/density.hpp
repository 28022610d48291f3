#pragma once

#include <span>
#include <vector>

namespace bbm {

/// Sampled density on a caller-supplied grid; the trapezoid integral is cached as `normalization`.
class DensityCurve {
public:
    DensityCurve() = default;
    DensityCurve(std::vector<double> grid, std::vector<double> values);

    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double normalization() const { return normalization_; }

    /// Copy rescaled to unit mass. Fails on a zero-mass curve.
    DensityCurve normalized() const;

    /// Linear interpolation; zero outside the grid.
    double at(double x) const;

    /// Cumulative trapezoid integral at x, in units of the current normalization.
    double cumulative(double x) const;

    /// cumulative() at each of the ascending abscissae xs, in one sweep.
    std::vector<double> cumulative_sorted(std::span<const double> xs) const;

    /// Abscissa of the largest sample.
    double mode() const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
    double normalization_ = 0.0;
};

/// L1 distance of two curves, integrated on the union of both grids by trapezoid.
double l1_distance(const DensityCurve& a, const DensityCurve& b);

}  // namespace bbm
