#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace mtoa::sim {

enum class Scheme { kMtoaL, kMtoaG };

std::string_view to_string(Scheme scheme);
/// Accepts "mtoa-l" / "mtoa-g" (case-insensitive); throws ConfigError otherwise.
Scheme parse_scheme(std::string_view text);

/// Everything needed to run one seeded replication.
struct NetworkConfig {
    std::size_t n = 1;              ///< node count
    std::uint64_t horizon = 1;      ///< T, slots
    std::size_t null_actions = 1;   ///< L
    double alpha = 0.9;             ///< learning rate, (0, 1]
    Scheme scheme = Scheme::kMtoaL;
    double q_threshold = 0.0;       ///< Q_th, MTOA-L only
    /// Q-reset window, MTOA-G only. nullopt means unbounded.
    std::optional<std::uint64_t> reset_window;
    std::uint64_t seed = 0;
    /// Record the transmit-action Q value seen by fresh HOL packets (MTOA-L).
    bool record_q0 = false;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

}  // namespace mtoa::sim
