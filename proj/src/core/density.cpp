#include "bbmlab/core/density.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "bbmlab/core/quadrature.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

DensityCurve::DensityCurve(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (grid_.size() != values_.size() || grid_.size() < 2) {
        fail(ErrorKind::InvalidInput, "DensityCurve needs matching grid/value arrays of length >= 2");
    }
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1])) {
            fail(ErrorKind::InvalidInput, "DensityCurve grid must be strictly increasing");
        }
    }
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            fail(ErrorKind::InvalidInput, "DensityCurve values must be finite and non-negative");
        }
    }
    normalization_ = trapezoid(grid_, values_);
}

DensityCurve DensityCurve::normalized() const {
    if (!(normalization_ > 0.0)) {
        fail(ErrorKind::Domain, "cannot normalize a density with zero mass");
    }
    std::vector<double> v(values_.size());
    std::transform(values_.begin(), values_.end(), v.begin(),
                   [n = normalization_](double x) { return x / n; });
    return DensityCurve(grid_, std::move(v));
}

double DensityCurve::at(double x) const {
    if (x < grid_.front() || x > grid_.back()) return 0.0;
    auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    if (it == grid_.end()) return values_.back();
    const std::size_t i = static_cast<std::size_t>(std::distance(grid_.begin(), it));
    const double f = (x - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
    return values_[i - 1] + f * (values_[i] - values_[i - 1]);
}

double DensityCurve::cumulative(double x) const {
    if (x <= grid_.front()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (grid_[i] <= x) {
            acc += 0.5 * (grid_[i] - grid_[i - 1]) * (values_[i] + values_[i - 1]);
        } else {
            const double vx = at(x);
            acc += 0.5 * (x - grid_[i - 1]) * (vx + values_[i - 1]);
            break;
        }
    }
    return acc;
}

std::vector<double> DensityCurve::cumulative_sorted(std::span<const double> xs) const {
    std::vector<double> out(xs.size(), 0.0);
    double acc = 0.0;
    std::size_t i = 1;
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const double x = xs[j];
        if (x <= grid_.front()) continue;
        while (i < grid_.size() && grid_[i] <= x) {
            acc += 0.5 * (grid_[i] - grid_[i - 1]) * (values_[i] + values_[i - 1]);
            ++i;
        }
        out[j] = i < grid_.size() ? acc + 0.5 * (x - grid_[i - 1]) * (at(x) + values_[i - 1]) : acc;
    }
    return out;
}

double DensityCurve::mode() const {
    auto it = std::max_element(values_.begin(), values_.end());
    return grid_[static_cast<std::size_t>(std::distance(values_.begin(), it))];
}

double l1_distance(const DensityCurve& a, const DensityCurve& b) {
    std::vector<double> xs;
    xs.reserve(a.grid().size() + b.grid().size());
    std::merge(a.grid().begin(), a.grid().end(), b.grid().begin(), b.grid().end(),
               std::back_inserter(xs));
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::vector<double> d(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = std::abs(a.at(xs[i]) - b.at(xs[i]));
    return trapezoid(xs, d);
}

}  // namespace bbm
