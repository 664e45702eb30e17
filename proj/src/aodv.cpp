#include "bhlab/aodv.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "bhlab/error.hpp"

namespace bhlab {

std::string_view to_string(DropCause cause) {
  switch (cause) {
    case DropCause::NoRoute: return "NoRoute";
    case DropCause::BlackholeAbsorbed: return "BlackholeAbsorbed";
    case DropCause::QueueOverflow: return "QueueOverflow";
    case DropCause::OutOfRange: return "OutOfRange";
    case DropCause::EndOfSim: return "EndOfSim";
  }
  return "Unknown";
}

}  // namespace bhlab

namespace bhlab::aodv {

namespace {

std::uint32_t saturating_add(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t max = std::numeric_limits<std::uint32_t>::max();
  return a > max - b ? max : a + b;
}

}  // namespace

bool is_better_route(const RouteEntry& candidate, const RouteEntry& incumbent) {
  if (candidate.dest_seq != incumbent.dest_seq) return candidate.dest_seq > incumbent.dest_seq;
  return candidate.hop_count < incumbent.hop_count;
}

bool RouteTable::offer(const RouteEntry& entry, SimTime now) {
  auto it = routes_.find(entry.dest);
  if (it == routes_.end()) {
    routes_.emplace(entry.dest, entry);
    return true;
  }
  if (it->second.expiry <= now || is_better_route(entry, it->second)) {
    it->second = entry;
    return true;
  }
  return false;
}

std::optional<RouteEntry> RouteTable::live(NodeId dest, SimTime now) const {
  auto it = routes_.find(dest);
  if (it == routes_.end() || it->second.expiry <= now) return std::nullopt;
  return it->second;
}

std::optional<RouteEntry> RouteTable::any(NodeId dest) const {
  auto it = routes_.find(dest);
  if (it == routes_.end()) return std::nullopt;
  return it->second;
}

Router::Router(Simulator& sim, std::vector<Behavior> behaviors, Config config,
               DataCallbacks callbacks)
    : sim_(sim), config_(config), callbacks_(std::move(callbacks)) {
  if (behaviors.size() != sim.node_count()) {
    throw Error(ErrorCode::InvalidSpec, "behavior list must cover every node");
  }
  nodes_.resize(behaviors.size());
  for (std::size_t i = 0; i < behaviors.size(); ++i) nodes_[i].behavior = behaviors[i];
  sim_.on_receive([this](NodeId node, const Frame& frame) { receive(node, frame); });
  sim_.on_drop([this](const Frame& frame, RadioDrop) { on_radio_drop(frame); });
}

Router::NodeState& Router::state(NodeId n) {
  if (index_of(n) >= nodes_.size()) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(index_of(n)));
  }
  return nodes_[index_of(n)];
}

void Router::send(const DataPacket& pkt) {
  NodeState& st = state(pkt.src);
  if (auto route = st.routes.live(pkt.dst, sim_.now())) {
    transmit_data(pkt.src, route->next_hop, pkt);
    return;
  }
  auto& queue = st.queued[pkt.dst];
  if (queue.size() >= config_.queue_capacity) {
    drop(pkt, DropCause::QueueOverflow);
    return;
  }
  queue.push_back(pkt);
  if (!st.discoveries.contains(pkt.dst)) originate_route_discovery(pkt.src, pkt.dst);
}

void Router::originate_route_discovery(NodeId node, NodeId dest) {
  NodeState& st = state(node);
  if (st.routes.live(dest, sim_.now())) return;

  Discovery& d = st.discoveries[dest];
  d.attempts += 1;
  d.generation = next_generation_++;

  st.seq += 1;
  Rreq r;
  r.origin = node;
  r.origin_seq = st.seq;
  r.rreq_id = st.next_rreq_id++;
  r.dest = dest;
  r.known_dest_seq = st.routes.any(dest) ? st.routes.any(dest)->dest_seq : 0;
  r.hop_count = 0;
  st.seen_rreqs.emplace(node, r.rreq_id);
  broadcast_rreq(node, r);

  const std::uint64_t generation = d.generation;
  sim_.schedule_after(
      config_.retry_interval, [this, node, dest, generation] { retry_timer(node, dest, generation); },
      node);
}

void Router::retry_timer(NodeId node, NodeId dest, std::uint64_t generation) {
  NodeState& st = state(node);
  auto it = st.discoveries.find(dest);
  if (it == st.discoveries.end() || it->second.generation != generation) return;
  if (st.routes.live(dest, sim_.now())) {
    st.discoveries.erase(it);
    flush_queue(node, dest);
    return;
  }
  if (it->second.attempts <= config_.max_retries) {
    originate_route_discovery(node, dest);
    return;
  }
  st.discoveries.erase(it);
  auto queued = std::move(st.queued[dest]);
  st.queued.erase(dest);
  for (const DataPacket& pkt : queued) drop(pkt, DropCause::NoRoute);
}

void Router::handle_rreq(NodeId node, const Rreq& r, NodeId prev_hop) {
  NodeState& st = state(node);
  if (st.behavior == Behavior::Blackhole) {
    blackhole_handle_rreq(node, r, prev_hop);
    return;
  }
  if (!st.seen_rreqs.emplace(r.origin, r.rreq_id).second) return;

  const SimTime now = sim_.now();
  st.routes.offer(RouteEntry{r.origin, prev_hop, r.hop_count + 1, r.origin_seq,
                             now + config_.route_lifetime},
                  now);

  if (node == r.dest) {
    st.seq = std::max(st.seq, r.known_dest_seq);
    unicast_rrep(node, prev_hop, Rrep{node, st.seq, 0, r.origin});
    return;
  }
  if (auto route = st.routes.live(r.dest, now); route && route->dest_seq >= r.known_dest_seq) {
    unicast_rrep(node, prev_hop, Rrep{r.dest, route->dest_seq, route->hop_count, r.origin});
    return;
  }
  Rreq next = r;
  next.hop_count += 1;
  broadcast_rreq(node, next);
}

void Router::blackhole_handle_rreq(NodeId node, const Rreq& r, NodeId prev_hop) {
  NodeState& st = state(node);
  if (st.behavior != Behavior::Blackhole) {
    throw Error(ErrorCode::InvalidSpec, "blackhole handler invoked on an honest node");
  }
  if (!st.seen_rreqs.emplace(r.origin, r.rreq_id).second) return;
  if (node == r.dest) {
    st.seq = std::max(st.seq, r.known_dest_seq);
    unicast_rrep(node, prev_hop, Rrep{node, st.seq, 0, r.origin});
    return;
  }
  unicast_rrep(node, prev_hop,
               Rrep{r.dest, saturating_add(r.known_dest_seq, config_.seq_boost), 1, r.origin});
}

void Router::handle_rrep(NodeId node, const Rrep& r, NodeId prev_hop) {
  NodeState& st = state(node);
  const SimTime now = sim_.now();
  st.routes.offer(
      RouteEntry{r.dest, prev_hop, r.hop_count + 1, r.dest_seq, now + config_.route_lifetime}, now);

  if (node == r.origin) {
    st.discoveries.erase(r.dest);
    flush_queue(node, r.dest);
    return;
  }
  auto reverse = st.routes.live(r.origin, now);
  if (!reverse) return;
  Rrep next = r;
  next.hop_count += 1;
  unicast_rrep(node, reverse->next_hop, next);
}

ForwardAction Router::forward_data(NodeId node, const DataPacket& pkt) const {
  const NodeState& st = nodes_.at(index_of(node));
  if (node == pkt.dst) return action::Deliver{};
  if (st.behavior == Behavior::Blackhole) return action::Drop{DropCause::BlackholeAbsorbed};
  if (auto route = st.routes.live(pkt.dst, sim_.now())) return action::Forward{route->next_hop};
  return action::Drop{DropCause::NoRoute};
}

void Router::receive(NodeId node, const Frame& frame) {
  if (const auto* rreq = std::any_cast<Rreq>(&frame.payload)) {
    if (state(node).behavior == Behavior::Blackhole) {
      blackhole_handle_rreq(node, *rreq, frame.sender);
    } else {
      handle_rreq(node, *rreq, frame.sender);
    }
  } else if (const auto* rrep = std::any_cast<Rrep>(&frame.payload)) {
    handle_rrep(node, *rrep, frame.sender);
  } else if (const auto* data = std::any_cast<DataPacket>(&frame.payload)) {
    handle_data(node, *data);
  }
}

void Router::on_radio_drop(const Frame& frame) {
  if (const auto* data = std::any_cast<DataPacket>(&frame.payload)) {
    drop(*data, DropCause::OutOfRange);
  }
}

void Router::handle_data(NodeId node, const DataPacket& pkt) {
  const ForwardAction act = forward_data(node, pkt);
  if (std::holds_alternative<action::Deliver>(act)) {
    if (callbacks_.delivered) callbacks_.delivered(pkt, sim_.now());
  } else if (const auto* fwd = std::get_if<action::Forward>(&act)) {
    transmit_data(node, fwd->next_hop, pkt);
  } else {
    drop(pkt, std::get<action::Drop>(act).cause);
  }
}

void Router::broadcast_rreq(NodeId node, const Rreq& r) {
  tx_log_.push_back(TxRecord{sim_.now(), node, PacketKind::Rreq, r.origin, r.rreq_id});
  sim_.transmit(node, std::nullopt, config_.rreq_bytes, r);
}

void Router::unicast_rrep(NodeId node, NodeId next_hop, const Rrep& r) {
  tx_log_.push_back(TxRecord{sim_.now(), node, PacketKind::Rrep, r.origin, 0});
  sim_.transmit(node, next_hop, config_.rrep_bytes, r);
}

void Router::transmit_data(NodeId node, NodeId next_hop, const DataPacket& pkt) {
  tx_log_.push_back(TxRecord{sim_.now(), node, PacketKind::Data, pkt.src, 0});
  sim_.transmit(node, next_hop, pkt.size_bytes, pkt);
}

void Router::flush_queue(NodeId node, NodeId dest) {
  NodeState& st = state(node);
  auto it = st.queued.find(dest);
  if (it == st.queued.end()) return;
  auto queued = std::move(it->second);
  st.queued.erase(it);
  for (const DataPacket& pkt : queued) {
    if (auto route = st.routes.live(dest, sim_.now())) {
      transmit_data(node, route->next_hop, pkt);
    } else {
      drop(pkt, DropCause::NoRoute);
    }
  }
}

void Router::drop(const DataPacket& pkt, DropCause cause) {
  if (callbacks_.dropped) callbacks_.dropped(pkt, cause, sim_.now());
}

}  // namespace bhlab::aodv
