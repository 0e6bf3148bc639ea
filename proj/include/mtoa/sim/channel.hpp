#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mtoa::sim {

enum class SlotResult { kIdle, kSuccess, kCollision };

struct ChannelResult {
    SlotResult kind = SlotResult::kIdle;
    std::size_t node = 0;  ///< meaningful only for kSuccess

    friend bool operator==(const ChannelResult&, const ChannelResult&) = default;
};

/// Collision channel: a slot succeeds iff exactly one node transmits.
ChannelResult resolve_channel(std::span<const std::size_t> transmitters) noexcept;

/// Everything that happened in one slot. Buffers are reused across slots.
struct SlotOutcome {
    std::vector<std::size_t> actions;       ///< chosen action per node
    std::vector<std::size_t> transmitters;  ///< ascending node indices
    ChannelResult result;
    std::vector<std::uint8_t> rewards;      ///< per node, 0 or 1
};

}  // namespace mtoa::sim
