#include "mtoa/sim/channel.hpp"

namespace mtoa::sim {

ChannelResult resolve_channel(std::span<const std::size_t> transmitters) noexcept {
    switch (transmitters.size()) {
        case 0:
            return {SlotResult::kIdle, 0};
        case 1:
            return {SlotResult::kSuccess, transmitters.front()};
        default:
            return {SlotResult::kCollision, 0};
    }
}

}  // namespace mtoa::sim
