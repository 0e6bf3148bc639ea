#include "mtoa/sim/agent.hpp"

#include <algorithm>

#include "mtoa/error.hpp"

namespace mtoa::sim {

double AgentState::q(std::size_t action) const noexcept {
    for (const auto& e : entries_) {
        if (e.action == action) return e.value;
    }
    return 0.0;
}

void AgentState::set_q(std::size_t action, double value) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), action,
                               [](const Entry& e, std::size_t a) { return e.action < a; });
    const bool present = it != entries_.end() && it->action == action;
    if (value == 0.0) {
        if (present) entries_.erase(it);
    } else if (present) {
        it->value = value;
    } else {
        entries_.insert(it, Entry{action, value});
    }
}

std::vector<double> AgentState::dense_row() const {
    std::vector<double> row(action_count_, 0.0);
    for (const auto& e : entries_) row[e.action] = e.value;
    return row;
}

std::size_t select_action(std::span<const double> q_row, CounterStream& rng) {
    if (q_row.empty()) throw ConfigError("select_action: empty Q row");
    const double best = *std::max_element(q_row.begin(), q_row.end());
    std::size_t ties = 0;
    std::size_t first = 0;
    for (std::size_t a = 0; a < q_row.size(); ++a) {
        if (q_row[a] == best) {
            if (ties == 0) first = a;
            ++ties;
        }
    }
    if (ties == 1) return first;
    std::size_t pick = rng.below(ties);
    for (std::size_t a = first; a < q_row.size(); ++a) {
        if (q_row[a] == best && pick-- == 0) return a;
    }
    throw InternalError("select_action: tie index out of range");
}

std::size_t select_action(const AgentState& state, CounterStream& rng) {
    const auto entries = state.nonzero();
    if (entries.empty()) {
        // Every action ties at zero.
        return rng.below(state.action_count());
    }
    double best = 0.0;
    std::size_t ties = 0;
    for (const auto& e : entries) {
        if (e.value > best) {
            best = e.value;
            ties = 1;
        } else if (e.value == best) {
            ++ties;
        }
    }
    if (best <= 0.0) {
        // Q values never go negative; guard anyway so the zero ties stay correct.
        throw InternalError("select_action: non-positive stored Q value");
    }
    std::size_t pick = ties == 1 ? 0 : rng.below(ties);
    for (const auto& e : entries) {
        if (e.value == best && pick-- == 0) return e.action;
    }
    throw InternalError("select_action: tie index out of range");
}

double update_q(double q, int reward, double alpha) noexcept {
    return std::clamp(q + alpha * (static_cast<double>(reward) - q), 0.0, 1.0);
}

}  // namespace mtoa::sim
