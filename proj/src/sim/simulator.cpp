#include "mtoa/sim/simulator.hpp"

#include <algorithm>
#include <limits>

#include "mtoa/error.hpp"

namespace mtoa::sim {

namespace {

constexpr std::size_t kMaxQ0Samples = 100000;

// Greedy selection for every node, then the channel outcome. Rewards are
// cleared; the caller assigns them.
void select_and_resolve(std::span<AgentState> states, std::span<CounterStream> streams,
                        SlotOutcome& out) {
    const std::size_t n = states.size();
    out.actions.resize(n);
    out.transmitters.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = select_action(states[i], streams[i]);
        out.actions[i] = a;
        if (a == kTransmitAction) out.transmitters.push_back(i);
    }
    out.result = resolve_channel(out.transmitters);
    out.rewards.assign(n, 0);
}

void check_sizes(std::span<AgentState> states, const NetworkConfig& config,
                 std::span<CounterStream> streams) {
    if (states.size() != config.n || streams.size() != config.n) {
        throw ConfigError("state and stream vectors must have one entry per node");
    }
}

}  // namespace

std::optional<double> jain_index(std::span<const double> rates) {
    if (rates.empty()) return std::nullopt;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double x : rates) {
        sum += x;
        sum_sq += x * x;
    }
    if (sum_sq <= 0.0) return std::nullopt;
    const double n = static_cast<double>(rates.size());
    return std::clamp(sum * sum / (n * sum_sq), 1.0 / n, 1.0);
}

std::vector<CounterStream> make_node_streams(std::uint64_t seed, std::size_t n) {
    std::vector<CounterStream> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) streams.emplace_back(seed, i);
    return streams;
}

std::vector<AgentState> make_agents(const NetworkConfig& config) {
    return std::vector<AgentState>(config.n, AgentState(config.null_actions));
}

void step_mtoa_l(std::span<AgentState> states, const NetworkConfig& config,
                 std::span<CounterStream> streams, SlotOutcome& out) {
    check_sizes(states, config, streams);
    select_and_resolve(states, streams, out);
    if (out.result.kind == SlotResult::kSuccess) out.rewards[out.result.node] = 1;

    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::size_t a = out.actions[i];
        const int reward = out.rewards[i];
        const double q = states[i].q(a);
        if (q == 0.0 && reward == 0) continue;  // stays at zero
        double updated = update_q(q, reward, config.alpha);
        if (updated <= config.q_threshold) updated = 0.0;
        states[i].set_q(a, updated);
    }
}

void step_mtoa_g(std::span<AgentState> states, const NetworkConfig& config,
                 std::span<CounterStream> streams, SlotOutcome& out) {
    check_sizes(states, config, streams);
    select_and_resolve(states, streams, out);
    const int reward = out.result.kind == SlotResult::kSuccess ? 1 : 0;
    std::fill(out.rewards.begin(), out.rewards.end(), static_cast<std::uint8_t>(reward));

    for (std::size_t i = 0; i < states.size(); ++i) {
        const std::size_t a = out.actions[i];
        const double q = states[i].q(a);
        if (q == 0.0 && reward == 0) continue;
        double updated = update_q(q, reward, config.alpha);
        if (updated > 0.0) {
            auto& w = states[i].window_counter;
            ++w;
            if (config.reset_window && w == *config.reset_window) {
                w = 0;
                updated = 0.0;
            }
        }
        states[i].set_q(a, updated);
    }
}

RunMetrics run_replication(const NetworkConfig& config) {
    config.validate();
    if (config.horizon >= (std::uint64_t{1} << 63)) {
        throw InternalError("horizon too large for the success counters");
    }

    auto states = make_agents(config);
    auto streams = make_node_streams(config.seed, config.n);
    SlotOutcome outcome;

    RunMetrics metrics;
    metrics.horizon = config.horizon;
    metrics.per_node_successes.assign(config.n, 0);

    const bool local = config.scheme == Scheme::kMtoaL;
    for (std::uint64_t t = 0; t < config.horizon; ++t) {
        if (local) {
            step_mtoa_l(states, config, streams, outcome);
        } else {
            step_mtoa_g(states, config, streams, outcome);
        }
        if (outcome.result.kind == SlotResult::kSuccess) {
            const std::size_t node = outcome.result.node;
            ++metrics.per_node_successes[node];
            if (config.record_q0 && metrics.q0_samples.size() < kMaxQ0Samples) {
                metrics.q0_samples.push_back(states[node].q(kTransmitAction));
            }
        }
    }

    const double horizon = static_cast<double>(config.horizon);
    std::uint64_t total = 0;
    metrics.per_node_rates.resize(config.n);
    for (std::size_t i = 0; i < config.n; ++i) {
        total += metrics.per_node_successes[i];
        metrics.per_node_rates[i] = static_cast<double>(metrics.per_node_successes[i]) / horizon;
    }
    if (total > config.horizon) throw InternalError("more successes than slots");
    metrics.lambda_out_hat = static_cast<double>(total) / horizon;
    metrics.jain = jain_index(metrics.per_node_rates);
    return metrics;
}

}  // namespace mtoa::sim
