#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "bhlab/engine.hpp"
#include "bhlab/packet.hpp"

namespace bhlab::aodv {

enum class Behavior { Honest, Blackhole };

struct RouteEntry {
  NodeId dest{};
  NodeId next_hop{};
  std::uint32_t hop_count = 0;
  std::uint32_t dest_seq = 0;
  SimTime expiry;
};

struct Rreq {
  NodeId origin{};
  std::uint32_t origin_seq = 0;
  std::uint32_t rreq_id = 0;
  NodeId dest{};
  std::uint32_t known_dest_seq = 0;
  std::uint32_t hop_count = 0;
};

struct Rrep {
  NodeId dest{};
  std::uint32_t dest_seq = 0;
  std::uint32_t hop_count = 0;
  NodeId origin{};
};

/// Candidate replaces incumbent iff it is fresher, or equally fresh and shorter.
bool is_better_route(const RouteEntry& candidate, const RouteEntry& incumbent);

class RouteTable {
 public:
  /// Installs the entry if there is no live route or the candidate is better.
  /// Returns whether the table changed.
  bool offer(const RouteEntry& entry, SimTime now);
  std::optional<RouteEntry> live(NodeId dest, SimTime now) const;
  std::optional<RouteEntry> any(NodeId dest) const;
  std::size_t size() const { return routes_.size(); }

 private:
  std::map<NodeId, RouteEntry> routes_;
};

namespace action {
struct Deliver {
  bool operator==(const Deliver&) const = default;
};
struct Forward {
  NodeId next_hop{};
  bool operator==(const Forward&) const = default;
};
struct Drop {
  DropCause cause{};
  bool operator==(const Drop&) const = default;
};
}  // namespace action

using ForwardAction = std::variant<action::Deliver, action::Forward, action::Drop>;

enum class PacketKind { Rreq, Rrep, Data };

/// One radio transmission initiated by the routing layer.
struct TxRecord {
  SimTime time;
  NodeId transmitter{};
  PacketKind kind{};
  NodeId origin{};          // RREQ/RREP origin, DATA source
  std::uint32_t rreq_id = 0;  // RREQ only
};

struct Config {
  SimTime route_lifetime = SimTime::from_secs(10);
  std::uint32_t max_retries = 2;
  SimTime retry_interval = SimTime::from_secs(1);
  std::size_t queue_capacity = 64;
  std::uint32_t seq_boost = 1'000'000;
  std::uint32_t rreq_bytes = 24;
  std::uint32_t rrep_bytes = 20;
};

/// Application-facing outcome callbacks.
struct DataCallbacks {
  std::function<void(const DataPacket&, SimTime)> delivered;
  std::function<void(const DataPacket&, DropCause, SimTime)> dropped;
};

/// Reactive on-demand distance-vector routing for every node of one
/// simulator, plus the blackhole variant: a blackhole answers every route
/// request with a forged, artificially fresh one-hop reply and swallows any
/// data that is then routed through it.
class Router {
 public:
  Router(Simulator& sim, std::vector<Behavior> behaviors, Config config = {},
         DataCallbacks callbacks = {});
  Router(const Router&) = delete;
  Router& operator=(const Router&) = delete;

  /// Hands a packet to the routing layer at its source node.
  void send(const DataPacket& pkt);

  void originate_route_discovery(NodeId node, NodeId dest);
  void handle_rreq(NodeId node, const Rreq& r, NodeId prev_hop);
  void blackhole_handle_rreq(NodeId node, const Rreq& r, NodeId prev_hop);
  void handle_rrep(NodeId node, const Rrep& r, NodeId prev_hop);
  ForwardAction forward_data(NodeId node, const DataPacket& pkt) const;

  Behavior behavior(NodeId n) const { return nodes_.at(index_of(n)).behavior; }
  const RouteTable& routes(NodeId n) const { return nodes_.at(index_of(n)).routes; }
  RouteTable& routes(NodeId n) { return nodes_.at(index_of(n)).routes; }
  std::uint32_t sequence(NodeId n) const { return nodes_.at(index_of(n)).seq; }
  void set_sequence(NodeId n, std::uint32_t seq) { nodes_.at(index_of(n)).seq = seq; }
  const std::vector<TxRecord>& tx_log() const { return tx_log_; }
  const Config& config() const { return config_; }

 private:
  struct Discovery {
    std::uint32_t attempts = 0;
    std::uint64_t generation = 0;
  };
  struct NodeState {
    Behavior behavior = Behavior::Honest;
    std::uint32_t seq = 0;
    std::uint32_t next_rreq_id = 0;
    RouteTable routes;
    std::set<std::pair<NodeId, std::uint32_t>> seen_rreqs;
    std::map<NodeId, std::deque<DataPacket>> queued;
    std::map<NodeId, Discovery> discoveries;
  };

  NodeState& state(NodeId n);
  void receive(NodeId node, const Frame& frame);
  void on_radio_drop(const Frame& frame);
  void broadcast_rreq(NodeId node, const Rreq& r);
  void unicast_rrep(NodeId node, NodeId next_hop, const Rrep& r);
  void transmit_data(NodeId node, NodeId next_hop, const DataPacket& pkt);
  void handle_data(NodeId node, const DataPacket& pkt);
  void retry_timer(NodeId node, NodeId dest, std::uint64_t generation);
  void flush_queue(NodeId node, NodeId dest);
  void drop(const DataPacket& pkt, DropCause cause);

  Simulator& sim_;
  Config config_;
  DataCallbacks callbacks_;
  std::vector<NodeState> nodes_;
  std::uint64_t next_generation_ = 0;
  std::vector<TxRecord> tx_log_;
};

}  // namespace bhlab::aodv
