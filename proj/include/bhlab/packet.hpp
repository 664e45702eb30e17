#pragma once

#include <compare>
#include <cstdint>
#include <string_view>

#include "bhlab/types.hpp"

namespace bhlab {

/// The 4-tuple identifying one application flow.
struct FlowKey {
  std::uint32_t src_addr = 0;
  std::uint32_t dst_addr = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  auto operator<=>(const FlowKey&) const = default;
};

enum class DropCause { NoRoute, BlackholeAbsorbed, QueueOverflow, OutOfRange, EndOfSim };

std::string_view to_string(DropCause cause);

struct DataPacket {
  FlowKey key;
  std::uint32_t seq = 0;
  NodeId src{};
  NodeId dst{};
  std::uint32_t size_bytes = 0;
  SimTime sent_at;
};

}  // namespace bhlab
