#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "bhlab/aodv.hpp"
#include "bhlab/packet.hpp"

namespace bhlab::flowmon {

/// Constant-bit-rate application flow.
struct FlowSpec {
  NodeId src{};
  NodeId dst{};
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint32_t packet_size_bytes = 0;
  std::uint64_t data_rate_bps = 0;
  std::uint32_t packet_count = 0;
  SimTime start;

  FlowKey key() const {
    return FlowKey{node_address(src), node_address(dst), src_port, dst_port};
  }
  /// packet_size_bytes * 8 / data_rate_bps, floored to the nanosecond.
  SimTime interval() const;
};

/// Per-flow statistics; the 17 stored features plus ground truth.
struct FlowRecord {
  std::uint32_t src_addr = 0;
  std::uint32_t dst_addr = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  SimTime time_first_tx;
  std::optional<SimTime> time_first_rx;
  SimTime time_last_tx;
  std::optional<SimTime> time_last_rx;
  std::int64_t delay_sum_ns = 0;
  std::int64_t jitter_sum_ns = 0;
  std::int64_t last_delay_ns = 0;
  std::uint64_t tx_packets = 0;
  std::uint64_t rx_packets = 0;
  std::uint64_t lost_packets = 0;
  std::uint64_t tx_bytes = 0;
  std::uint64_t rx_bytes = 0;
  double throughput_bps = 0.0;
  std::uint64_t blackhole_absorbed = 0;  // ground truth, not a feature

  FlowKey key() const { return FlowKey{src_addr, dst_addr, src_port, dst_port}; }
  bool operator==(const FlowRecord&) const = default;
};

enum class ObservationKind { Tx, Rx, Drop };

struct FlowObservation {
  ObservationKind kind{};
  DropCause cause{};  // meaningful for Drop only
  FlowKey key;
  std::uint32_t seq = 0;
  SimTime time;
  std::uint32_t size_bytes = 0;
};

/// Accumulates flow statistics from Tx/Rx/Drop observations. Every
/// observation is also kept in an append-only log.
class FlowMonitor {
 public:
  void observe(const FlowObservation& o);
  /// Closes unterminated packets as Drop(EndOfSim) at `end` and returns one
  /// record per flow in first-seen order.
  std::vector<FlowRecord> finalize(SimTime end);
  const std::vector<FlowObservation>& log() const { return log_; }

 private:
  struct PacketState {
    SimTime tx_time;
    std::uint32_t size_bytes = 0;
    bool terminated = false;
  };
  struct FlowState {
    FlowRecord record;
    bool any_tx = false;
    std::optional<std::int64_t> previous_delay;
    std::map<std::uint32_t, PacketState> packets;
  };

  FlowState& flow(const FlowKey& key);

  std::map<FlowKey, std::size_t> index_;
  std::vector<FlowState> flows_;
  std::vector<FlowObservation> log_;
};

/// Drives CBR flows through a router and reports outcomes to a monitor.
class TrafficGenerator {
 public:
  TrafficGenerator(Simulator& sim, aodv::Router& router, FlowMonitor& monitor)
      : sim_(sim), router_(router), monitor_(monitor) {}

  /// Throws InvalidSpec for src == dst or a zero size, rate, or count.
  void start_flow(const FlowSpec& spec);

  /// Callbacks to hand to the router so outcomes reach the monitor.
  static aodv::DataCallbacks callbacks_for(FlowMonitor& monitor);

 private:
  Simulator& sim_;
  aodv::Router& router_;
  FlowMonitor& monitor_;
};

}  // namespace bhlab::flowmon
