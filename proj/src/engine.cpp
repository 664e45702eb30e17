#include "bhlab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bhlab/error.hpp"

namespace bhlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchedulingInPast: return "SchedulingInPast";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DuplicateTerminal: return "DuplicateTerminal";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InsufficientClassCount: return "InsufficientClassCount";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SingleClassTruth: return "SingleClassTruth";
    case ErrorCode::MalformedCurve: return "MalformedCurve";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::SingleClassDataset: return "SingleClassDataset";
  }
  return "Unknown";
}

Simulator::Simulator(RadioConfig radio) : radio_(radio) {
  if (!(radio_.range_m > 0.0) || !(radio_.bandwidth_bps > 0.0) || radio_.prop_delay_per_m < 0.0) {
    throw Error(ErrorCode::ConfigError, "radio range and bandwidth must be positive");
  }
}

std::uint64_t Simulator::schedule(SimTime at, Action action, std::optional<NodeId> target) {
  if (at < clock_) {
    throw Error(ErrorCode::SchedulingInPast, "event at " + std::to_string(at.nanos()) +
                                                 " ns precedes clock " +
                                                 std::to_string(clock_.nanos()) + " ns");
  }
  const std::uint64_t seq = next_seq_++;
  queue_.push_back(Event{at, seq, target, std::move(action)});
  std::push_heap(queue_.begin(), queue_.end(), Later{});
  return seq;
}

std::size_t Simulator::run_until(SimTime end) {
  if (end < clock_) throw Error(ErrorCode::SchedulingInPast, "run_until before current clock");
  std::size_t count = 0;
  while (!queue_.empty() && queue_.front().fire_time <= end) {
    std::pop_heap(queue_.begin(), queue_.end(), Later{});
    Event ev = std::move(queue_.back());
    queue_.pop_back();
    clock_ = ev.fire_time;
    if (tracing_) trace_.push_back(TraceEntry{ev.fire_time, ev.seq, ev.target});
    ev.action();
    ++count;
    ++executed_;
  }
  clock_ = end;
  return count;
}

NodeId Simulator::add_node(Position initial, Velocity velocity) {
  if (!std::isfinite(initial.x) || !std::isfinite(initial.y)) {
    throw Error(ErrorCode::InvalidSpec, "node position must be finite");
  }
  nodes_.push_back(Node{initial, velocity});
  return node_id(static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Simulator::Node& Simulator::node(NodeId n) const {
  if (index_of(n) >= nodes_.size()) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(index_of(n)));
  }
  return nodes_[index_of(n)];
}

Position Simulator::position_at(NodeId n, SimTime t) const {
  const Node& nd = node(n);
  if (nd.velocity.vx == 0.0 && nd.velocity.vy == 0.0) return nd.initial;
  const double s = t.seconds();
  return Position{nd.initial.x + nd.velocity.vx * s, nd.initial.y + nd.velocity.vy * s};
}

std::vector<NodeId> Simulator::neighbors(NodeId n, SimTime t) const {
  const Position here = position_at(n, t);
  std::vector<NodeId> out;
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (i == index_of(n)) continue;
    if (distance(here, position_at(node_id(i), t)) <= radio_.range_m) out.push_back(node_id(i));
  }
  return out;
}

SimTime Simulator::latency(std::uint32_t size_bytes, double distance_m) const {
  const long double airtime_ns =
      static_cast<long double>(size_bytes) * 8.0L * 1e9L / static_cast<long double>(radio_.bandwidth_bps);
  const long double prop_ns = static_cast<long double>(radio_.prop_delay_per_m) * distance_m * 1e9L;
  auto ns = static_cast<std::int64_t>(std::floor(airtime_ns)) +
            static_cast<std::int64_t>(std::floor(prop_ns));
  return SimTime::from_nanos(std::max<std::int64_t>(ns, 1));
}

void Simulator::transmit(NodeId src, std::optional<NodeId> dst, std::uint32_t size_bytes,
                         std::any payload) {
  node(src);
  if (size_bytes == 0) throw Error(ErrorCode::InvalidSpec, "transmit with zero size");
  auto frame = std::make_shared<const Frame>(Frame{src, dst, size_bytes, std::move(payload)});
  const Position from = position_at(src, clock_);
  if (dst) {
    const double d = distance(from, position_at(*dst, clock_));
    if (*dst != src && d <= radio_.range_m) {
      deliver(*dst, frame, d);
    } else if (drop_) {
      drop_(*frame, RadioDrop::OutOfRange);
    }
    return;
  }
  for (NodeId m : neighbors(src, clock_)) deliver(m, frame, distance(from, position_at(m, clock_)));
}

void Simulator::deliver(NodeId receiver, std::shared_ptr<const Frame> frame, double distance_m) {
  const SimTime at = clock_ + latency(frame->size_bytes, distance_m);
  schedule(
      at,
      [this, receiver, frame = std::move(frame)] {
        if (receive_) receive_(receiver, *frame);
      },
      receiver);
}

}  // namespace bhlab
