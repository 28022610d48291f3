#include "bbmlab/fkpp/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/error.hpp"

namespace bbm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

FieldSample from_log(double logu) { return {std::exp(logu), logu}; }

FieldSample blend(const FieldSample& a, const FieldSample& b, double f) {
    if (std::isfinite(a.logu) && std::isfinite(b.logu)) {
        return from_log(a.logu + f * (b.logu - a.logu));
    }
    const double u = a.u + f * (b.u - a.u);
    return {u, u > 0.0 ? std::log(u) : kNegInf};
}
}  // namespace

std::string_view to_string(WindowPolicy p) noexcept {
    return p == WindowPolicy::Fixed ? "fixed" : "moving-with-front";
}

std::string_view to_string(Scheme s) noexcept { return s == Scheme::Fd ? "fd" : "duhamel"; }

double required_fixed_width(double t_max) { return 10.0 * std::sqrt(t_max) + 2.0 * std::sqrt(2.0) * t_max; }

std::size_t SpaceTimeGrid::nodes() const {
    return static_cast<std::size_t>(std::llround((z_max - z_min) / dz)) + 1;
}

std::size_t SpaceTimeGrid::steps() const { return static_cast<std::size_t>(std::llround(t_max / dt)); }

void SpaceTimeGrid::validate() const {
    std::ostringstream why;
    if (!(dz > 0.0) || !(dt > 0.0) || !(t_max > 0.0)) {
        why << "dz, dt and t_max must be positive";
    } else if (!(z_max > z_min) || !std::isfinite(z_min) || !std::isfinite(z_max)) {
        why << "need finite z_min < z_max";
    } else if (nodes() < 5 || nodes() > (std::size_t{1} << 26)) {
        why << "node count " << nodes() << " outside [5, 2^26]";
    } else if (std::abs(static_cast<double>(steps()) * dt - t_max) > 1e-9 * t_max) {
        why << "t_max must be a whole number of steps";
    } else if (window_policy == WindowPolicy::Fixed && z_max - z_min < required_fixed_width(t_max) - 1e-9) {
        why << "fixed window width " << (z_max - z_min) << " is below 10 sqrt(t_max) + 2 sqrt2 t_max = "
            << required_fixed_width(t_max);
    }
    if (!why.str().empty()) fail(ErrorKind::InvalidInput, "grid: " + why.str());
}

double InitialCondition::at(double z, double dz) const {
    if (f) return f(z);
    // Cell average of 1_{z>0} over [z - dz/2, z + dz/2].
    const double hi = z + 0.5 * dz;
    const double lo = z - 0.5 * dz;
    if (lo >= 0.0) return 1.0;
    if (hi <= 0.0) return 0.0;
    return hi / dz;
}

SolutionField::SolutionField(SpaceTimeGrid grid, Scheme scheme, std::size_t nodes)
    : grid_(grid), scheme_(scheme), nodes_(nodes) {}

void SolutionField::append_slice(double t, double origin, std::span<const double> logu) {
    if (logu.size() != nodes_) fail(ErrorKind::InvalidInput, "slice length mismatch");
    if (!times_.empty() && !(t > times_.back())) fail(ErrorKind::InvalidInput, "slice times must increase");
    times_.push_back(t);
    origins_.push_back(origin);
    logu_.insert(logu_.end(), logu.begin(), logu.end());
}

void SolutionField::assign(std::vector<double> times, std::vector<double> origins, std::vector<double> logu) {
    if (times.size() != origins.size() || logu.size() != times.size() * nodes_) {
        fail(ErrorKind::Integrity, "field payload size does not match its header");
    }
    times_ = std::move(times);
    origins_ = std::move(origins);
    logu_ = std::move(logu);
}

std::size_t SolutionField::find_slice(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t - 1e-9);
    if (it != times_.end() && std::abs(*it - t) <= 1e-9) {
        return static_cast<std::size_t>(it - times_.begin());
    }
    return npos;
}

FieldSample SolutionField::evaluate_slice(std::size_t k, double z) const {
    const double x = (z - origins_[k]) / grid_.dz;
    const double last = static_cast<double>(nodes_ - 1);
    if (!(x >= -1e-9 && x <= last + 1e-9)) {
        std::ostringstream why;
        why << "z = " << z << " outside slice window [" << z_lo(k) << ", " << z_hi(k) << "] at t = " << times_[k];
        fail(ErrorKind::Coverage, why.str());
    }
    const double xc = std::clamp(x, 0.0, last);
    std::size_t i = static_cast<std::size_t>(xc);
    if (i >= nodes_ - 1) i = nodes_ - 2;
    const double f = xc - static_cast<double>(i);
    const auto row = logu(k);
    return blend(from_log(row[i]), from_log(row[i + 1]), f);
}

bool SolutionField::covers(double z, double t) const {
    if (times_.empty() || t < times_.front() - 1e-12 || t > times_.back() + 1e-12) return false;
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k1 = static_cast<std::size_t>(it - times_.begin());
    if (k1 >= times_.size()) k1 = times_.size() - 1;
    const std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
    for (std::size_t k : {k0, k1}) {
        if (z < z_lo(k) - 1e-9 || z > z_hi(k) + 1e-9) return false;
    }
    return true;
}

FieldSample SolutionField::evaluate(double z, double t) const {
    if (times_.empty() || t < times_.front() - 1e-12 || t > times_.back() + 1e-12) {
        std::ostringstream why;
        why << "t = " << t << " outside stored time range";
        fail(ErrorKind::Coverage, why.str());
    }
    if (const std::size_t k = find_slice(t); k != npos) return evaluate_slice(k, z);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t k1 = static_cast<std::size_t>(it - times_.begin());
    const std::size_t k0 = k1 - 1;
    const double f = (t - times_[k0]) / (times_[k1] - times_[k0]);
    return blend(evaluate_slice(k0, z), evaluate_slice(k1, z), f);
}

FieldInvariantReport check_field_invariants(const SolutionField& field, double abs_tol, double rel_tol,
                                            double min_time) {
    FieldInvariantReport r;
    for (std::size_t k = 0; k < field.slices(); ++k) {
        const double t = field.time(k);
        if (t <= 0.0 || t < min_time) continue;
        const auto row = field.logu(k);
        double prev = 0.0;
        for (std::size_t i = 0; i < field.nodes(); ++i) {
            const double z = field.z_at(k, i);
            const double u = std::exp(row[i]);
            if (!(row[i] <= abs_tol) || std::isnan(row[i])) {
                ++r.range_violations;
                r.worst_range = std::max(r.worst_range, u - 1.0);
            }
            if (i > 0 && u < prev - abs_tol) {
                ++r.monotone_violations;
                r.worst_monotone = std::max(r.worst_monotone, prev - u);
            }
            prev = u;
            const double log_p = log_brownian_cdf(z, t);
            // u <= P(B_t <= z)
            if (row[i] > log_p && u - std::exp(log_p) > abs_tol + rel_tol * std::exp(log_p)) {
                ++r.upper_violations;
                r.worst_upper = std::max(r.worst_upper, row[i] - log_p);
            }
            // u >= exp(-t) P(B_t <= z)
            const double log_lo = log_p - t;
            if (row[i] < log_lo && std::exp(log_lo) - u > abs_tol + rel_tol * std::exp(log_lo)) {
                ++r.lower_violations;
                r.worst_lower = std::max(r.worst_lower, log_lo - row[i]);
            }
        }
    }
    return r;
}

}  // namespace bbm
