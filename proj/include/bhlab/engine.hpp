#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bhlab/types.hpp"

namespace bhlab {

struct RadioConfig {
  double range_m = 250.0;
  double bandwidth_bps = 6e6;
  double prop_delay_per_m = 3.336e-9;  // seconds per meter
  bool operator==(const RadioConfig&) const = default;
};

/// One radio transmission. `receiver` is empty for broadcast.
struct Frame {
  NodeId sender{};
  std::optional<NodeId> receiver;
  std::uint32_t size_bytes = 0;
  std::any payload;
};

enum class RadioDrop { OutOfRange };

/// Executed-event trace entry, used for determinism checks.
struct TraceEntry {
  SimTime fire_time;
  std::uint64_t seq = 0;
  std::optional<NodeId> target;
  bool operator==(const TraceEntry&) const = default;
};

/// Single-threaded discrete-event core with an ideal unit-disk radio.
///
/// Events fire in (fire_time, seq) order; seq is the insertion counter, so
/// events scheduled for the same instant run first-in first-out. Nodes move
/// with constant velocity from their initial position.
class Simulator {
 public:
  using Action = std::function<void()>;
  using ReceiveHandler = std::function<void(NodeId receiver, const Frame&)>;
  using DropHandler = std::function<void(const Frame&, RadioDrop)>;

  explicit Simulator(RadioConfig radio = {});

  SimTime now() const { return clock_; }
  const RadioConfig& radio() const { return radio_; }

  /// Throws SchedulingInPast when `at` precedes the clock.
  std::uint64_t schedule(SimTime at, Action action, std::optional<NodeId> target = {});
  std::uint64_t schedule_after(SimTime delay, Action action, std::optional<NodeId> target = {}) {
    return schedule(clock_ + delay, std::move(action), target);
  }

  /// Runs every event with fire_time <= end, then sets the clock to end.
  std::size_t run_until(SimTime end);

  std::size_t pending() const { return queue_.size(); }
  std::uint64_t executed() const { return executed_; }

  NodeId add_node(Position initial, Velocity velocity = {});
  std::size_t node_count() const { return nodes_.size(); }
  Position position_at(NodeId n, SimTime t) const;
  /// Every other node within range at time t, ascending id.
  std::vector<NodeId> neighbors(NodeId n, SimTime t) const;

  /// Airtime plus propagation, floored to whole nanoseconds.
  SimTime latency(std::uint32_t size_bytes, double distance_m) const;

  /// Unicast when dst is set, broadcast otherwise. Out-of-range unicast is
  /// reported to the drop handler instead of being delivered.
  void transmit(NodeId src, std::optional<NodeId> dst, std::uint32_t size_bytes, std::any payload);

  void on_receive(ReceiveHandler handler) { receive_ = std::move(handler); }
  void on_drop(DropHandler handler) { drop_ = std::move(handler); }
  void enable_trace(bool on) { tracing_ = on; }
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  struct Event {
    SimTime fire_time;
    std::uint64_t seq;
    std::optional<NodeId> target;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.seq > b.seq;
    }
  };
  struct Node {
    Position initial;
    Velocity velocity;
  };

  const Node& node(NodeId n) const;
  void deliver(NodeId receiver, std::shared_ptr<const Frame> frame, double distance_m);

  RadioConfig radio_;
  SimTime clock_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t executed_ = 0;
  std::vector<Event> queue_;  // binary heap ordered by Later
  std::vector<Node> nodes_;
  ReceiveHandler receive_;
  DropHandler drop_;
  bool tracing_ = false;
  std::vector<TraceEntry> trace_;
};

}  // namespace bhlab
