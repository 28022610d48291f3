#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "bbmlab/error.hpp"

namespace bbm::sim {

struct SimConfig {
    double horizon = 1.0;
    std::uint64_t seed = 0;
    std::size_t population_cap = 2'000'000;
    std::size_t record_top_k = 64;
};

/// Throws InvalidInput on a non-positive or non-finite horizon or a zero cap.
void validate(const SimConfig& config);

struct Realization {
    std::uint64_t replica = 0;
    /// Root stream identifier; the whole tree is a function of (seed, stream).
    std::uint64_t stream = 0;
    /// min(t, first branching time).
    double tau = 0.0;
    /// Root position at tau.
    double x_at_tau = 0.0;
    double m_t = 0.0;
    std::uint64_t n_t = 0;
    /// Largest terminal positions, descending.
    std::vector<double> top_positions;
    bool branched = false;
    /// The root's exponential clock, not truncated at the horizon.
    double root_lifetime = 0.0;
    /// Terminal position of the always-first-child line of descent.
    double line_position = 0.0;
};

struct ConditionedBatch {
    std::vector<Realization> accepted;
    std::uint64_t trials = 0;
    double threshold = 0.0;
    double acceptance_rate = 0.0;
    bool target_reached = false;
    /// Set when no trial was accepted; the batch is still a valid result.
    bool empty = true;
};

/// Statistics carried by a capped run.
struct PartialStats {
    std::uint64_t replicas_completed = 0;
    std::uint64_t capped_replica = 0;
    std::uint64_t particles_at_cap = 0;
    double time_reached = 0.0;
};

class CappedError : public Error {
public:
    CappedError(const std::string& what, PartialStats partial) : Error(ErrorKind::Capped, what), partial_(partial) {}
    const PartialStats& partial() const noexcept { return partial_; }

private:
    PartialStats partial_;
};

/// Stream identifier of replica i.
std::uint64_t replica_stream(std::uint64_t replica) noexcept;

/// Exact event-driven binary BBM from the origin. Every particle line draws its terminal position
/// first and fills in its branch points by Brownian bridge; children get streams split from the
/// parent stream, so the tree does not depend on expansion order.
/// With a threshold, the first terminal position above it aborts the tree and nullopt is returned.
/// Throws CappedError when the population exceeds the cap.
std::optional<Realization> simulate_stream(const SimConfig& config, std::uint64_t stream,
                                           std::optional<double> threshold = std::nullopt);

Realization simulate(const SimConfig& config, std::uint64_t replica);

struct BatchOptions {
    std::size_t shards = 1;
    std::size_t block = 8192;
};

/// Replicas first .. first + count - 1, delivered to the sink in replica order. The output does
/// not depend on the shard count. A capped replica stops the batch after the replicas before it.
void for_each_realization(const SimConfig& config, std::uint64_t first, std::uint64_t count,
                          const std::function<void(const Realization&)>& sink, const BatchOptions& options = {});

/// Rejection sampling of {M_t <= threshold} over replicas 0, 1, ...; stops after max_trials or at
/// the replica that brings the accepted count to target_accepted (0: no target).
ConditionedBatch simulate_conditioned(const SimConfig& config, double threshold, std::uint64_t max_trials,
                                      std::uint64_t target_accepted = 0, const BatchOptions& options = {});

struct ProbabilityEstimate {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    std::uint64_t successes = 0;
    std::uint64_t n = 0;
};

/// P(M_t <= threshold) over n replicas with a 95% Wilson interval. Needs n >= 100.
ProbabilityEstimate estimate_probability(const SimConfig& config, double threshold, std::uint64_t n,
                                         const BatchOptions& options = {});

}  // namespace bbm::sim
