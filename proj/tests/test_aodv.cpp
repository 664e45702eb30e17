#include <gtest/gtest.h>

#include <set>

#include "bhlab/dataset.hpp"
#include "bhlab/rng.hpp"
#include "bhlab/scenario.hpp"
#include "net_fixture.hpp"

using namespace bhlab;
using aodv::Behavior;
using bhlab::testing::bfs_hops;
using bhlab::testing::line;
using bhlab::testing::Net;

namespace {

constexpr auto H = Behavior::Honest;
constexpr auto B = Behavior::Blackhole;

std::size_t count_tx(const aodv::Router& r, aodv::PacketKind kind, std::optional<NodeId> by = {}) {
  std::size_t n = 0;
  for (const auto& t : r.tx_log()) {
    if (t.kind == kind && (!by || t.transmitter == *by)) ++n;
  }
  return n;
}

}  // namespace

TEST(RouteTable, FreshnessRule) {
  aodv::RouteEntry inc{node_id(2), node_id(1), 3, 10, SimTime::from_secs(10)};
  auto fresher = inc;
  fresher.dest_seq = 11;
  fresher.hop_count = 9;
  auto shorter = inc;
  shorter.hop_count = 2;
  auto stale = inc;
  stale.dest_seq = 9;
  stale.hop_count = 1;
  EXPECT_TRUE(aodv::is_better_route(fresher, inc));
  EXPECT_TRUE(aodv::is_better_route(shorter, inc));
  EXPECT_FALSE(aodv::is_better_route(stale, inc));
  EXPECT_FALSE(aodv::is_better_route(inc, inc));
}

TEST(RouteTable, ExpiredRouteIsReplacedAndNotLive) {
  aodv::RouteTable t;
  const SimTime now = SimTime::from_secs(1);
  EXPECT_TRUE(t.offer({node_id(2), node_id(1), 1, 50, SimTime::from_secs(5)}, now));
  EXPECT_FALSE(t.offer({node_id(2), node_id(3), 1, 10, SimTime::from_secs(5)}, now));
  EXPECT_TRUE(t.live(node_id(2), SimTime::from_secs(4)).has_value());
  EXPECT_FALSE(t.live(node_id(2), SimTime::from_secs(6)).has_value());
  EXPECT_TRUE(t.offer({node_id(2), node_id(3), 4, 10, SimTime::from_secs(16)}, SimTime::from_secs(6)));
  EXPECT_EQ(t.live(node_id(2), SimTime::from_secs(6))->next_hop, node_id(3));
}

TEST(Aodv, HonestChainDeliversOverShortestPath) {
  const auto pos = line(3, 200);
  Net net(pos, {H, H, H});
  net.traffic->start_flow(net.flow(0, 2, 10));
  net.sim.run_until(SimTime::from_secs(30));
  const auto recs = net.monitor.finalize(net.sim.now());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].tx_packets, 10u);
  EXPECT_EQ(recs[0].rx_packets, 10u);
  EXPECT_EQ(recs[0].lost_packets, 0u);
  EXPECT_EQ(recs[0].blackhole_absorbed, 0u);
  EXPECT_EQ(data::label_of(recs[0]), 0);

  auto route = net.router->routes(node_id(0)).any(node_id(2));
  ASSERT_TRUE(route);
  EXPECT_EQ(route->next_hop, node_id(1));
  EXPECT_EQ(static_cast<int>(route->hop_count), bfs_hops(pos, 250, 0)[2]);
  EXPECT_EQ(route->hop_count, 2u);
  // one flood: A and B each broadcast once, C replies, B relays the reply
  EXPECT_EQ(count_tx(*net.router, aodv::PacketKind::Rreq), 2u);
  EXPECT_EQ(count_tx(*net.router, aodv::PacketKind::Rrep), 2u);
  EXPECT_EQ(count_tx(*net.router, aodv::PacketKind::Data), 20u);
}

TEST(Aodv, BlackholeChainAbsorbsEverything) {
  Net net(line(3, 200), {H, B, H});
  net.traffic->start_flow(net.flow(0, 2, 10));
  net.sim.run_until(SimTime::from_secs(30));
  const auto recs = net.monitor.finalize(net.sim.now());
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].rx_packets, 0u);
  EXPECT_EQ(recs[0].lost_packets, 10u);
  EXPECT_EQ(recs[0].blackhole_absorbed, 10u);
  EXPECT_EQ(data::label_of(recs[0]), 1);

  auto route = net.router->routes(node_id(0)).any(node_id(2));
  ASSERT_TRUE(route);
  EXPECT_EQ(route->next_hop, node_id(1));
  EXPECT_GE(route->dest_seq, 1'000'000u);
  // the forged reply comes from B; C never hears the request
  EXPECT_EQ(count_tx(*net.router, aodv::PacketKind::Rrep, node_id(1)), 1u);
  EXPECT_EQ(count_tx(*net.router, aodv::PacketKind::Rrep, node_id(2)), 0u);
  EXPECT_EQ(count_tx(*net.router, aodv::PacketKind::Data, node_id(1)), 0u);
}

TEST(Aodv, ForgedReplyBeatsGenuineRoute) {
  // A(0) reaches C(3) via honest D(2) or blackhole B(1), both two hops.
  std::vector<Position> pos{{0, 0}, {200, 40}, {200, -40}, {400, 0}};
  Net net(pos, {H, B, H, H});
  net.traffic->start_flow(net.flow(0, 3, 10));
  net.sim.run_until(SimTime::from_secs(30));
  const auto recs = net.monitor.finalize(net.sim.now());
  EXPECT_EQ(net.router->routes(node_id(0)).any(node_id(3))->next_hop, node_id(1));
  EXPECT_GE(recs[0].blackhole_absorbed, 1u);
  EXPECT_EQ(recs[0].rx_packets + recs[0].lost_packets, recs[0].tx_packets);
  EXPECT_EQ(data::label_of(recs[0]), 1);
}

TEST(Aodv, BlackholeDestinationIsServed) {
  Net net(line(2, 200), {H, B});
  net.traffic->start_flow(net.flow(0, 1, 5));
  net.sim.run_until(SimTime::from_secs(30));
  const auto recs = net.monitor.finalize(net.sim.now());
  EXPECT_EQ(recs[0].rx_packets, 5u);
  EXPECT_EQ(net.router->routes(node_id(0)).any(node_id(1))->dest_seq, 0u);
}

TEST(Aodv, RreqDuplicatesAreSuppressed) {
  // dense clique-ish cluster: every node hears every broadcast
  std::vector<Position> pos;
  for (int i = 0; i < 12; ++i) pos.push_back({10.0 * i, 0});
  pos.push_back({400, 0});  // unreachable destination, forces retries
  Net net(pos, std::vector<Behavior>(pos.size(), H));
  net.traffic->start_flow(net.flow(0, 12, 1));
  net.sim.run_until(SimTime::from_secs(30));
  std::set<std::tuple<NodeId, NodeId, std::uint32_t>> seen;
  for (const auto& t : net.router->tx_log()) {
    if (t.kind != aodv::PacketKind::Rreq) continue;
    EXPECT_TRUE(seen.emplace(t.transmitter, t.origin, t.rreq_id).second);
  }
  // three attempts, each flooding at most once per reachable node
  EXPECT_EQ(seen.size(), 3u * 12u);
  const auto recs = net.monitor.finalize(net.sim.now());
  EXPECT_EQ(recs[0].lost_packets, 1u);
  ASSERT_EQ(net.monitor.log().back().kind, flowmon::ObservationKind::Drop);
  EXPECT_EQ(net.monitor.log().back().cause, DropCause::NoRoute);
  // dropped after the initial attempt and two 1 s retries
  EXPECT_EQ(net.monitor.log().back().time, SimTime::from_secs(4));
}

TEST(Aodv, QueueOverflowAndNoRoute) {
  Net net({{0, 0}, {1000, 0}}, {H, H});
  net.traffic->start_flow(net.flow(0, 1, 100));
  net.sim.run_until(SimTime::from_secs(30));
  std::size_t overflow = 0, noroute = 0;
  for (const auto& o : net.monitor.log()) {
    if (o.kind != flowmon::ObservationKind::Drop) continue;
    if (o.cause == DropCause::QueueOverflow) ++overflow;
    if (o.cause == DropCause::NoRoute) ++noroute;
  }
  EXPECT_EQ(noroute, 64u);
  EXPECT_EQ(overflow, 36u);
}

TEST(Aodv, IntermediateNodeWithFreshRouteReplies) {
  Net net(line(4, 200), {H, H, H, H});
  net.traffic->start_flow(net.flow(1, 3, 1, SimTime::from_secs(1)));
  net.traffic->start_flow(net.flow(0, 3, 1, SimTime::from_secs(2)));
  net.sim.run_until(SimTime::from_secs(30));
  for (const auto& t : net.router->tx_log()) {
    if (t.kind == aodv::PacketKind::Rreq && t.origin == node_id(0)) {
      EXPECT_EQ(t.transmitter, node_id(0));
    }
  }
  const auto recs = net.monitor.finalize(net.sim.now());
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].rx_packets, 1u);
  EXPECT_EQ(net.router->routes(node_id(0)).any(node_id(3))->hop_count, 3u);
}

TEST(Aodv, ForwardDataDecisions) {
  Net net(line(3, 200), {H, B, H});
  DataPacket p;
  p.src = node_id(0);
  p.dst = node_id(2);
  EXPECT_EQ(net.router->forward_data(node_id(2), p), aodv::ForwardAction{aodv::action::Deliver{}});
  EXPECT_EQ(net.router->forward_data(node_id(1), p),
            aodv::ForwardAction{aodv::action::Drop{DropCause::BlackholeAbsorbed}});
  EXPECT_EQ(net.router->forward_data(node_id(0), p),
            aodv::ForwardAction{aodv::action::Drop{DropCause::NoRoute}});
  net.router->routes(node_id(0)).offer({node_id(2), node_id(1), 2, 1, SimTime::from_secs(5)},
                                       SimTime{});
  EXPECT_EQ(net.router->forward_data(node_id(0), p),
            aodv::ForwardAction{aodv::action::Forward{node_id(1)}});
}

TEST(Aodv, RoutesMatchBfsOnRandomStaticTopologies) {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng.uniform_index(20);
    std::vector<Position> pos;
    for (std::size_t i = 0; i < n; ++i) pos.push_back({rng.uniform(0, 1000), rng.uniform(0, 50)});
    const std::size_t src = rng.uniform_index(n);
    std::size_t dst = rng.uniform_index(n - 1);
    if (dst >= src) ++dst;
    const auto hops = bfs_hops(pos, 250, src);
    if (hops[dst] < 0) continue;
    Net net(pos, std::vector<Behavior>(n, H));
    net.traffic->start_flow(net.flow(src, dst, 10));
    net.sim.run_until(SimTime::from_secs(30));
    const auto recs = net.monitor.finalize(net.sim.now());
    EXPECT_EQ(recs[0].rx_packets, 10u) << "trial " << trial;
    auto route = net.router->routes(node_id(src)).any(node_id(dst));
    ASSERT_TRUE(route);
    EXPECT_EQ(static_cast<int>(route->hop_count), hops[dst]) << "trial " << trial;
    // one flood costs at most one broadcast per node
    EXPECT_LE(count_tx(*net.router, aodv::PacketKind::Rreq), n);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(Aodv, BlackholeNeverForwardsDataInSweeps) {
  ScenarioConfig cfg;
  cfg.scenario_count = 20;
  for (std::uint32_t i = 0; i < cfg.scenario_count; ++i) {
    const auto params = sample_scenario(cfg, i);
    const auto res = run_scenario(cfg, params, true);
    std::set<std::uint32_t> bh(params.blackholes.begin(), params.blackholes.end());
    for (const auto& t : res.transmissions) {
      if (t.kind == aodv::PacketKind::Data) {
        EXPECT_FALSE(bh.count(index_of(t.transmitter))) << "scenario " << i;
      }
    }
  }
}
