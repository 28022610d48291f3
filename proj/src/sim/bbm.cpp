#include "bbmlab/sim/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <queue>
#include <sstream>
#include <thread>

#include "bbmlab/core/gaussian.hpp"
#include "bbmlab/core/intervals.hpp"
#include "bbmlab/sim/random.hpp"

namespace bbm::sim {

namespace {

struct Segment {
    std::uint64_t stream;
    double t0;
    double x0;
};

class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}
    void push(double x) {
        if (k_ == 0) return;
        if (heap_.size() < k_) {
            heap_.push(x);
        } else if (x > heap_.top()) {
            heap_.pop();
            heap_.push(x);
        }
    }
    std::vector<double> sorted() {
        std::vector<double> out;
        out.reserve(heap_.size());
        while (!heap_.empty()) {
            out.push_back(heap_.top());
            heap_.pop();
        }
        std::reverse(out.begin(), out.end());
        return out;
    }

private:
    std::size_t k_;
    std::priority_queue<double, std::vector<double>, std::greater<double>> heap_;
};

}  // namespace

void validate(const SimConfig& config) {
    if (!(config.horizon > 0.0) || !std::isfinite(config.horizon)) fail(ErrorKind::InvalidInput, "horizon must be positive and finite");
    if (config.population_cap < 1) fail(ErrorKind::InvalidInput, "population_cap must be at least 1");
}

std::uint64_t replica_stream(std::uint64_t replica) noexcept { return split(0x5bd1e9955bd1e995ULL, replica); }

std::optional<Realization> simulate_stream(const SimConfig& config, std::uint64_t stream, std::optional<double> threshold) {
    const double T = config.horizon;
    const bool conditioned = threshold.has_value();
    const double z = conditioned ? *threshold : 0.0;
    if (conditioned) {
        // Most trials die on the root line; decide that before allocating anything.
        thread_local double cached_t = 0.0, cached_z = 0.0, cached_p = -1.0;
        if (cached_t != T || cached_z != z || cached_p < 0.0) {
            cached_t = T;
            cached_z = z;
            cached_p = normal_cdf(z / std::sqrt(T));
        }
        if (Stream(config.seed, stream).uniform() > cached_p) return std::nullopt;
    }

    Realization r;
    r.stream = stream;
    r.m_t = -std::numeric_limits<double>::infinity();
    TopK top(config.record_top_k);
    std::vector<Segment> pending{{stream, 0.0, 0.0}};
    std::vector<double> times;
    bool root = true;

    while (!pending.empty()) {
        const Segment seg = pending.back();
        pending.pop_back();
        Stream rng(config.seed, seg.stream);
        const double span = T - seg.t0;
        const double sd = std::sqrt(span);

        const double u0 = rng.uniform();
        if (conditioned && u0 > normal_cdf((z - seg.x0) / sd)) return std::nullopt;
        const double x_end = seg.x0 + sd * normal_quantile(u0);
        if (conditioned && x_end > z) return std::nullopt;

        times.clear();
        double t = seg.t0;
        for (;;) {
            const double e = rng.exponential();
            if (root && times.empty()) r.root_lifetime = e;
            t += e;
            if (t >= T) break;
            times.push_back(t);
        }

        double tp = seg.t0;
        double xp = seg.x0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double s = times[i];
            const double mean = xp + (s - tp) / (T - tp) * (x_end - xp);
            const double var = (s - tp) * (T - s) / (T - tp);
            const double x = mean + std::sqrt(var) * rng.normal();
            pending.push_back({split(seg.stream, i + 1), s, x});
            if (root && i == 0) r.x_at_tau = x;
            tp = s;
            xp = x;
        }
        if (root) {
            r.branched = !times.empty();
            r.tau = r.branched ? times.front() : T;
            if (!r.branched) r.x_at_tau = x_end;
            r.line_position = x_end;
            root = false;
        }

        ++r.n_t;
        r.m_t = std::max(r.m_t, x_end);
        top.push(x_end);
        if (r.n_t + pending.size() > config.population_cap) {
            PartialStats partial;
            partial.particles_at_cap = r.n_t + pending.size();
            partial.time_reached = seg.t0;
            std::ostringstream why;
            why << "population exceeded the cap of " << config.population_cap << " particles";
            throw CappedError(why.str(), partial);
        }
    }
    r.top_positions = top.sorted();
    return r;
}

Realization simulate(const SimConfig& config, std::uint64_t replica) {
    validate(config);
    try {
        Realization r = *simulate_stream(config, replica_stream(replica));
        r.replica = replica;
        return r;
    } catch (const CappedError& e) {
        PartialStats partial = e.partial();
        partial.capped_replica = replica;
        throw CappedError(e.what(), partial);
    }
}

namespace {

/// Runs work(block_first, block_count, slot) on up to `shards` threads per round and hands the
/// slots to merge(slot) in block order. merge returns false to stop.
template <class Slot, class Work, class Merge>
void run_blocks(std::uint64_t first, std::uint64_t count, const BatchOptions& options, Work work, Merge merge) {
    const std::size_t shards = std::max<std::size_t>(1, options.shards);
    const std::uint64_t block = std::max<std::size_t>(1, options.block);
    std::uint64_t next = first;
    const std::uint64_t end = first + count;
    while (next < end) {
        std::vector<Slot> slots;
        std::vector<std::uint64_t> starts;
        for (std::size_t j = 0; j < shards && next < end; ++j) {
            starts.push_back(next);
            next = std::min(end, next + block);
        }
        slots.resize(starts.size());
        auto task = [&](std::size_t j) {
            const std::uint64_t b = starts[j];
            const std::uint64_t n = std::min(end, b + block) - b;
            try {
                work(b, n, slots[j]);
            } catch (...) {
                slots[j].error = std::current_exception();
            }
        };
        if (starts.size() == 1) {
            task(0);
        } else {
            std::vector<std::jthread> threads;
            for (std::size_t j = 0; j < starts.size(); ++j) threads.emplace_back(task, j);
        }
        for (auto& slot : slots) {
            if (!merge(slot)) return;
        }
    }
}

struct RealizationSlot {
    std::vector<Realization> done;
    std::exception_ptr error;
};

struct ConditionedSlot {
    std::vector<Realization> accepted;
    std::uint64_t first = 0;
    std::uint64_t count = 0;
    std::exception_ptr error;
};

}  // namespace

void for_each_realization(const SimConfig& config, std::uint64_t first, std::uint64_t count,
                          const std::function<void(const Realization&)>& sink, const BatchOptions& options) {
    validate(config);
    std::uint64_t delivered = 0;
    run_blocks<RealizationSlot>(
        first, count, options,
        [&](std::uint64_t b, std::uint64_t n, RealizationSlot& slot) {
            slot.done.reserve(n);
            for (std::uint64_t i = b; i < b + n; ++i) slot.done.push_back(simulate(config, i));
        },
        [&](RealizationSlot& slot) {
            for (const auto& r : slot.done) {
                sink(r);
                ++delivered;
            }
            if (slot.error) {
                try {
                    std::rethrow_exception(slot.error);
                } catch (const CappedError& e) {
                    PartialStats partial = e.partial();
                    partial.replicas_completed = delivered;
                    throw CappedError(e.what(), partial);
                }
            }
            return true;
        });
}

ConditionedBatch simulate_conditioned(const SimConfig& config, double threshold, std::uint64_t max_trials,
                                      std::uint64_t target_accepted, const BatchOptions& options) {
    validate(config);
    if (!std::isfinite(threshold)) fail(ErrorKind::InvalidInput, "threshold must be finite");
    if (max_trials < 1) fail(ErrorKind::InvalidInput, "max_trials must be at least 1");
    ConditionedBatch batch;
    batch.threshold = threshold;
    run_blocks<ConditionedSlot>(
        0, max_trials, options,
        [&](std::uint64_t b, std::uint64_t n, ConditionedSlot& slot) {
            slot.first = b;
            slot.count = n;
            for (std::uint64_t i = b; i < b + n; ++i) {
                std::optional<Realization> r;
                try {
                    r = simulate_stream(config, replica_stream(i), threshold);
                } catch (const CappedError& e) {
                    PartialStats partial = e.partial();
                    partial.capped_replica = i;
                    throw CappedError(e.what(), partial);
                }
                if (r) {
                    r->replica = i;
                    slot.accepted.push_back(std::move(*r));
                }
            }
        },
        [&](ConditionedSlot& slot) {
            for (auto& r : slot.accepted) {
                batch.accepted.push_back(std::move(r));
                if (target_accepted > 0 && batch.accepted.size() == target_accepted) {
                    batch.trials = batch.accepted.back().replica + 1;
                    batch.target_reached = true;
                    return false;
                }
            }
            if (slot.error) {
                try {
                    std::rethrow_exception(slot.error);
                } catch (const CappedError& e) {
                    PartialStats partial = e.partial();
                    partial.replicas_completed = partial.capped_replica;
                    throw CappedError(e.what(), partial);
                }
            }
            batch.trials = slot.first + slot.count;
            return true;
        });
    batch.empty = batch.accepted.empty();
    batch.acceptance_rate = static_cast<double>(batch.accepted.size()) / static_cast<double>(batch.trials);
    return batch;
}

ProbabilityEstimate estimate_probability(const SimConfig& config, double threshold, std::uint64_t n,
                                         const BatchOptions& options) {
    if (n < 100) fail(ErrorKind::InvalidInput, "estimate_probability needs n >= 100");
    ProbabilityEstimate est;
    est.n = n;
    if (threshold == std::numeric_limits<double>::infinity()) {
        est.successes = n;
    } else {
        SimConfig lean = config;
        lean.record_top_k = 0;
        est.successes = simulate_conditioned(lean, threshold, n, 0, options).accepted.size();
    }
    est.estimate = static_cast<double>(est.successes) / static_cast<double>(n);
    const Interval ci = wilson_interval(est.successes, n);
    est.lower = ci.lower;
    est.upper = ci.upper;
    return est;
}

}  // namespace bbm::sim
