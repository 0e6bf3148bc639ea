#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mtoa/rng.hpp"

namespace mtoa::sim {

/// Action 0 transmits; actions 1..L are null actions.
inline constexpr std::size_t kTransmitAction = 0;

/// Per-node bandit state: one Q value per action plus the MTOA-G window counter.
///
/// Q values start at zero and only the chosen action is ever updated, so the
/// row is stored sparsely: entries equal to zero are not kept. This keeps the
/// footprint independent of L, which the experiments push to 10^6.
class AgentState {
public:
    struct Entry {
        std::size_t action;
        double value;
    };

    explicit AgentState(std::size_t null_actions) : action_count_(null_actions + 1) {}

    std::size_t action_count() const noexcept { return action_count_; }

    double q(std::size_t action) const noexcept;
    void set_q(std::size_t action, double value);

    /// Nonzero entries, ascending by action.
    std::span<const Entry> nonzero() const noexcept { return entries_; }

    std::vector<double> dense_row() const;

    std::uint64_t window_counter = 0;

private:
    std::size_t action_count_;
    std::vector<Entry> entries_;
};

/// Greedy selection over a dense row. Ties are broken uniformly: the tied
/// indices are listed in ascending order and one draw picks among them.
/// No draw is consumed when the maximum is unique. Throws ConfigError on an
/// empty row.
std::size_t select_action(std::span<const double> q_row, CounterStream& rng);

/// Same contract as the dense overload, without touching the zero entries.
std::size_t select_action(const AgentState& state, CounterStream& rng);

/// Q <- Q + alpha * (reward - Q), kept inside [0, 1].
double update_q(double q, int reward, double alpha) noexcept;

}  // namespace mtoa::sim
