#pragma once

#include <cstdint>

#include "mtoa/sim/simulator.hpp"
#include "mtoa/strategy/strategy.hpp"

namespace mtoa::sim {

/// Result of running nodes that follow a fixed access strategy directly,
/// with no learning in the loop.
struct StrategyRunMetrics {
    RunMetrics metrics;
    /// Fraction of (node, slot) pairs in a non-capture stage during which no
    /// other node held a reservation.
    double beta_noncapture = 0.0;
    /// Success frequency of non-capture transmissions on an unreserved channel.
    double p_noncapture = 0.0;
    /// Success frequency of transmissions from capture stages (and fresh
    /// batches when n_C >= 1).
    double p_capture = 0.0;
};

/// Saturated n-node slotted Aloha in which every node runs `strategy`:
/// transmit with q_{min(k,K)} after k failures; a success reserves the
/// channel for the remaining M - 1 packets of the batch.
StrategyRunMetrics simulate_access_strategy(const strategy::AccessStrategy& strategy,
                                            std::size_t n, std::uint64_t horizon,
                                            std::uint64_t seed);

}  // namespace mtoa::sim
