#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtoa/rng.hpp"
#include "mtoa/sim/agent.hpp"
#include "mtoa/sim/channel.hpp"
#include "mtoa/sim/config.hpp"

namespace mtoa::sim {

struct RunMetrics {
    std::uint64_t horizon = 0;
    std::vector<std::uint64_t> per_node_successes;
    std::vector<double> per_node_rates;  ///< successes / T
    double lambda_out_hat = 0.0;         ///< network throughput
    /// Jain index of the per-node rates; nullopt when no packet got through.
    std::optional<double> jain;
    /// Transmit-action Q values seen by fresh HOL packets (only with record_q0).
    std::vector<double> q0_samples;

    friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// (sum x)^2 / (n * sum x^2). nullopt for an empty or all-zero vector.
std::optional<double> jain_index(std::span<const double> rates);

/// One independent stream per node, keyed by (seed, node index).
std::vector<CounterStream> make_node_streams(std::uint64_t seed, std::size_t n);

/// One MTOA-L slot with local rewards and the Q_th reset rule.
void step_mtoa_l(std::span<AgentState> states, const NetworkConfig& config,
                 std::span<CounterStream> streams, SlotOutcome& out);

/// One MTOA-G slot with global rewards and the Q-reset window.
void step_mtoa_g(std::span<AgentState> states, const NetworkConfig& config,
                 std::span<CounterStream> streams, SlotOutcome& out);

/// Runs T slots from the all-zero state. Bit-for-bit reproducible per config.
RunMetrics run_replication(const NetworkConfig& config);

/// Fresh agents for a config (all Q values zero, counters zero).
std::vector<AgentState> make_agents(const NetworkConfig& config);

}  // namespace mtoa::sim
