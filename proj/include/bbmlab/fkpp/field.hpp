#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace bbm {

enum class WindowPolicy { Fixed, MovingWithFront };
enum class Scheme { Fd, Duhamel };

std::string_view to_string(WindowPolicy p) noexcept;
std::string_view to_string(Scheme s) noexcept;

/// Uniform space-time grid. A fixed window must span 10 sqrt(t_max) + 2 sqrt2 t_max so that the
/// diffusive spread and the linear front range both fit; a moving window has constant width and
/// translates at speed sqrt2.
struct SpaceTimeGrid {
    double z_min = -25.0;
    double z_max = 25.0;
    double dz = 0.01;
    double dt = 0.005;
    double t_max = 5.0;
    WindowPolicy window_policy = WindowPolicy::Fixed;

    std::size_t nodes() const;
    std::size_t steps() const;
    /// Throws InvalidInput when an invariant fails.
    void validate() const;
};

/// Minimum width of a fixed window for horizon t.
double required_fixed_width(double t_max);

/// Initial data for the solvers: the Heaviside step 1_{z>0} (cell-averaged at z = 0) or a user function.
struct InitialCondition {
    std::function<double(double)> f;  ///< empty means Heaviside
    bool cdf_mode = true;             ///< assert monotone non-decreasing slices

    static InitialCondition heaviside() { return {}; }
    bool is_heaviside() const { return !f; }
    double at(double z, double dz) const;
};

struct FieldSample {
    double u = 0.0;
    double logu = 0.0;
};

/// Log-domain solution u(z, t) of the F-KPP equation on stored time slices.
/// Slice k covers z = origin[k] + i dz, i in [0, nodes). Immutable once built.
class SolutionField {
public:
    SolutionField() = default;
    SolutionField(SpaceTimeGrid grid, Scheme scheme, std::size_t nodes);

    const SpaceTimeGrid& grid() const { return grid_; }
    Scheme scheme() const { return scheme_; }
    std::size_t nodes() const { return nodes_; }
    std::size_t slices() const { return times_.size(); }
    std::span<const double> times() const { return times_; }
    double time(std::size_t k) const { return times_[k]; }
    double origin(std::size_t k) const { return origins_[k]; }
    double z_at(std::size_t k, std::size_t i) const { return origins_[k] + static_cast<double>(i) * grid_.dz; }
    std::span<const double> logu(std::size_t k) const {
        return {logu_.data() + k * nodes_, nodes_};
    }
    std::span<const double> raw() const { return logu_; }

    /// Window of slice k as [lo, hi].
    double z_lo(std::size_t k) const { return origins_[k]; }
    double z_hi(std::size_t k) const { return z_at(k, nodes_ - 1); }

    /// Index of the stored slice whose time equals t within 1e-9, or npos.
    std::size_t find_slice(double t) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Bilinear interpolation in (z, t); log-linear in z where all corners are positive.
    /// Throws Coverage outside the stored window or time range.
    FieldSample evaluate(double z, double t) const;
    /// Interpolation in z on one stored slice.
    FieldSample evaluate_slice(std::size_t k, double z) const;
    bool covers(double z, double t) const;

    void append_slice(double t, double origin, std::span<const double> logu);
    /// Bulk loader used by deserialisation.
    void assign(std::vector<double> times, std::vector<double> origins, std::vector<double> logu);

private:
    SpaceTimeGrid grid_;
    Scheme scheme_ = Scheme::Fd;
    std::size_t nodes_ = 0;
    std::vector<double> times_;
    std::vector<double> origins_;
    std::vector<double> logu_;
};

/// Violation counts of the four structural invariants of a CDF field (t > 0 slices only).
struct FieldInvariantReport {
    std::size_t range_violations = 0;       ///< u outside [0, 1]
    std::size_t monotone_violations = 0;    ///< u decreasing in z
    std::size_t upper_violations = 0;       ///< u > P(B_t <= z)
    std::size_t lower_violations = 0;       ///< u < exp(-t) P(B_t <= z)
    double worst_range = 0.0;
    double worst_monotone = 0.0;
    double worst_upper = 0.0;
    double worst_lower = 0.0;

    bool ok() const {
        return range_violations + monotone_violations + upper_violations + lower_violations == 0;
    }
};

/// Checks the invariants with an absolute slack `abs_tol` plus relative slack `rel_tol` on the bounds.
/// Slices with t < min_time are skipped.
FieldInvariantReport check_field_invariants(const SolutionField& field, double abs_tol, double rel_tol,
                                            double min_time = 0.0);

}  // namespace bbm
