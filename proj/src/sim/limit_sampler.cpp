#include "bbmlab/sim/limit_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "bbmlab/core/constants.hpp"
#include "bbmlab/error.hpp"
#include "bbmlab/sim/bbm.hpp"
#include "bbmlab/sim/random.hpp"

namespace bbm::sim {

namespace {
constexpr std::uint64_t kDrawDomain = 0x4c494d4954445257ULL;
constexpr std::uint64_t kTreeDomain = 0x4c494d4954545245ULL;

std::size_t pick(const std::vector<double>& cumulative, double u) {
    const double target = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}
}  // namespace

double LimitDraw::max() const {
    return points.empty() ? -std::numeric_limits<double>::infinity() : *std::max_element(points.begin(), points.end());
}

LimitExtremalSampler::LimitExtremalSampler(double alpha, const SolutionField& field, double phi, const LimitSamplerOptions& options)
    : alpha_(alpha), phi_(phi), dz_(field.grid().dz), atom_probability_(0.0), options_(options) {
    if (!(alpha < -kGamma)) fail(ErrorKind::Regime, "the limit extremal sampler needs alpha < -gamma");
    if (!(phi > -1.0 / alpha)) fail(ErrorKind::Domain, "phi must exceed -1/alpha");
    if (field.slices() < 4 || field.time(0) != 0.0) fail(ErrorKind::Coverage, "the sampler needs a field stored from t = 0");
    atom_probability_ = (-1.0 / alpha) / phi;

    const double c = kSqrt2 * alpha;
    const double growth = 1.0 - alpha * alpha;
    const std::size_t n_slices = field.slices();
    double total = 0.0;
    for (std::size_t k = 0; k < n_slices; ++k) {
        SliceTable table;
        const double s = field.time(k);
        table.s_lo = k == 0 ? 0.0 : 0.5 * (field.time(k - 1) + s);
        table.s_hi = k + 1 == n_slices ? s : 0.5 * (s + field.time(k + 1));
        if (!(table.s_hi > table.s_lo)) continue;
        const auto row = field.logu(k);
        std::vector<double> lw(row.size(), -std::numeric_limits<double>::infinity());
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (std::isfinite(row[i])) lw[i] = c * field.z_at(k, i) + growth * s + 2.0 * row[i];
            top = std::max(top, lw[i]);
        }
        if (!std::isfinite(top)) continue;
        std::size_t lo = 0, hi = row.size();
        while (lo < hi && lw[lo] < top - options.log_weight_floor) ++lo;
        while (hi > lo && lw[hi - 1] < top - options.log_weight_floor) --hi;
        table.z0 = field.z_at(k, lo);
        const double area = kSqrt2 / phi * dz_ * (table.s_hi - table.s_lo);
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            acc += area * std::exp(lw[i]);
            table.cumulative.push_back(acc);
        }
        total += acc;
        slices_.push_back(std::move(table));
        slice_cumulative_.push_back(total);
    }
    if (slices_.empty() || !(total > 0.0)) fail(ErrorKind::Coverage, "the sampler table carries no mass");
    table_mass_ = total;
}

LimitDraw LimitExtremalSampler::draw(std::uint64_t seed, std::uint64_t index) const {
    LimitDraw d;
    d.index = index;
    Stream rng(seed, split(kDrawDomain, index));
    if (rng.uniform() < atom_probability_) {
        d.atom = true;
        d.chi = rng.exponential() / (-kSqrt2 * alpha_);
        d.points.push_back(-d.chi);
        return d;
    }
    const SliceTable& table = slices_[pick(slice_cumulative_, rng.uniform())];
    const std::size_t i = pick(table.cumulative, rng.uniform());
    d.xi = table.s_lo + rng.uniform() * (table.s_hi - table.s_lo);
    d.chi = table.z0 + (static_cast<double>(i) + rng.uniform() - 0.5) * dz_;

    SimConfig config;
    config.horizon = d.xi;
    config.seed = seed;
    config.record_top_k = std::numeric_limits<std::size_t>::max();
    const std::uint64_t draw_stream = split(kTreeDomain, index);
    for (std::uint64_t which = 0; which < 2; ++which) {
        const std::uint64_t tree_stream = split(draw_stream, which);
        std::uint64_t budget = options_.initial_budget;
        for (std::uint64_t trial = 0;; ++trial) {
            if (trial == budget) {
                budget *= 2;
                ++d.budget_doublings;
                spdlog::info("limit sampler draw {}: rejection budget doubled to {} (xi = {}, chi = {})", index, budget, d.xi,
                             d.chi);
            }
            ++d.rejection_trials;
            const auto r = simulate_stream(config, split(tree_stream, trial), d.chi);
            if (!r) continue;
            for (double x : r->top_positions) d.points.push_back(x - d.chi);
            break;
        }
    }
    std::sort(d.points.begin(), d.points.end(), std::greater<double>());
    return d;
}

}  // namespace bbm::sim
