#include "mtoa/sim/strategy_network.hpp"

#include <limits>

#include "mtoa/error.hpp"

namespace mtoa::sim {

StrategyRunMetrics simulate_access_strategy(const strategy::AccessStrategy& strategy,
                                            std::size_t n, std::uint64_t horizon,
                                            std::uint64_t seed) {
    strategy.validate();
    if (n < 1) throw ConfigError("n must be >= 1");
    if (horizon < 1) throw ConfigError("T must be >= 1");

    const std::size_t capture = strategy.capture_depth;
    const std::size_t cutoff = strategy.cutoff;
    auto streams = make_node_streams(seed, n);
    std::vector<std::size_t> stage(n, 0);
    std::vector<std::size_t> transmitters;
    transmitters.reserve(n);

    constexpr std::size_t kNoHolder = std::numeric_limits<std::size_t>::max();
    std::size_t holder = kNoHolder;
    std::uint64_t reserved_left = 0;

    StrategyRunMetrics out;
    auto& metrics = out.metrics;
    metrics.horizon = horizon;
    metrics.per_node_successes.assign(n, 0);

    std::uint64_t nc_slots = 0, nc_unreserved = 0;
    std::uint64_t nc_tx = 0, nc_success = 0;
    std::uint64_t c_tx = 0, c_success = 0;

    for (std::uint64_t t = 0; t < horizon; ++t) {
        if (reserved_left > 0) {
            ++metrics.per_node_successes[holder];
            for (std::size_t i = 0; i < n; ++i) {
                if (i != holder && stage[i] >= capture) ++nc_slots;
            }
            if (--reserved_left == 0) holder = kNoHolder;
            continue;
        }

        transmitters.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (stage[i] >= capture) {
                ++nc_slots;
                ++nc_unreserved;
            }
            if (streams[i].uniform() < strategy.q(stage[i])) transmitters.push_back(i);
        }
        const auto result = resolve_channel(transmitters);
        for (std::size_t i : transmitters) {
            const bool noncapture = stage[i] >= capture;
            const bool won = result.kind == SlotResult::kSuccess;
            (noncapture ? nc_tx : c_tx) += 1;
            if (won) (noncapture ? nc_success : c_success) += 1;
            if (won) {
                stage[i] = 0;
            } else if (stage[i] < cutoff) {
                ++stage[i];
            }
        }
        if (result.kind == SlotResult::kSuccess) {
            ++metrics.per_node_successes[result.node];
            if (strategy.batch_size > 1) {
                holder = result.node;
                reserved_left = strategy.batch_size - 1;
            }
        }
    }

    const double T = static_cast<double>(horizon);
    std::uint64_t total = 0;
    metrics.per_node_rates.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        total += metrics.per_node_successes[i];
        metrics.per_node_rates[i] = static_cast<double>(metrics.per_node_successes[i]) / T;
    }
    metrics.lambda_out_hat = static_cast<double>(total) / T;
    metrics.jain = jain_index(metrics.per_node_rates);
    auto ratio = [](std::uint64_t a, std::uint64_t b) {
        return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
    };
    out.beta_noncapture = ratio(nc_unreserved, nc_slots);
    out.p_noncapture = ratio(nc_success, nc_tx);
    out.p_capture = ratio(c_success, c_tx);
    return out;
}

}  // namespace mtoa::sim
