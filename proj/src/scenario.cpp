#include "bhlab/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <numeric>
#include <thread>

#include "bhlab/error.hpp"
#include "bhlab/rng.hpp"

namespace bhlab {

using nlohmann::json;

namespace {

constexpr Range<std::uint32_t> kVehicleBounds{10, 65};
constexpr Range<std::uint32_t> kMaliciousBounds{1, 10};
constexpr Range<std::uint32_t> kRateBounds{600, 1800};
constexpr Range<std::uint32_t> kPacketCountBounds{7, 70};
constexpr Range<std::uint32_t> kPacketSizeBounds{1024, 1800};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

template <typename T>
void check_range(const char* name, const Range<T>& r, const Range<T>& bounds, bool enforce) {
  if (r.lo > r.hi) config_error(std::string(name) + ": lower bound exceeds upper bound");
  if (enforce && (r.lo < bounds.lo || r.hi > bounds.hi)) {
    config_error(std::string(name) + " must lie within [" + std::to_string(bounds.lo) + ", " +
                 std::to_string(bounds.hi) + "]");
  }
}

template <typename T>
json range_json(const Range<T>& r) {
  return json::array({r.lo, r.hi});
}

template <typename T>
Range<T> range_from(const json& j, const char* name, Range<T> fallback) {
  if (!j.contains(name)) return fallback;
  const json& v = j.at(name);
  if (v.is_number()) return {v.get<T>(), v.get<T>()};
  if (!v.is_array() || v.size() != 2) config_error(std::string(name) + " must be a number or [lo, hi]");
  return {v[0].get<T>(), v[1].get<T>()};
}

template <typename T>
void read_if(const json& j, const char* name, T& out) {
  if (j.contains(name)) out = j.at(name).get<T>();
}

}  // namespace

void validate(const ScenarioConfig& c) {
  const bool enforce = !c.allow_out_of_range;
  check_range("vehicles", c.vehicles, kVehicleBounds, enforce);
  check_range("malicious", c.malicious, kMaliciousBounds, enforce);
  check_range("data_rate_kbps", c.data_rate_kbps, kRateBounds, enforce);
  check_range("packet_count", c.packet_count, kPacketCountBounds, enforce);
  check_range("packet_size_bytes", c.packet_size_bytes, kPacketSizeBounds, enforce);
  if (c.vehicles.lo < 3) config_error("at least 3 vehicles are needed");
  // Every scenario must keep two honest vehicles to carry a flow.
  if (c.malicious.lo + 2 > c.vehicles.lo) {
    config_error("malicious vehicles must be fewer than vehicles (minimum " +
                 std::to_string(c.malicious.lo) + " vs " + std::to_string(c.vehicles.lo) + ")");
  }
  if (c.data_rate_kbps.lo == 0 || c.packet_count.lo == 0 || c.packet_size_bytes.lo == 0) {
    config_error("data rate, packet count and packet size must be positive");
  }
  if (c.flows_per_scenario == 0) config_error("flows_per_scenario must be positive");
  if (c.scenario_count == 0) config_error("scenario_count must be positive");
  if (!(c.sim_duration_s > 0.0)) config_error("sim_duration_s must be positive");
  if (!(c.arena_length_m > 0.0) || !(c.arena_width_m >= 0.0)) config_error("arena must be positive");
  if (!(c.radio.range_m > 0.0) || !(c.radio.bandwidth_bps > 0.0) || c.radio.prop_delay_per_m < 0.0) {
    config_error("radio range and bandwidth must be positive");
  }
  if (c.speed_mps.lo < 0.0 || c.speed_mps.lo > c.speed_mps.hi) config_error("bad speed range");
  if (c.flow_start_min_s < 0.0 || c.flow_start_min_s > c.flow_start_max_s ||
      c.flow_start_max_s >= c.sim_duration_s) {
    config_error("flow start window must lie inside the simulation");
  }
  if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0)) config_error("split must lie in (0, 1)");
  if (c.balance && (c.balance->malicious == 0 || c.balance->normal == 0)) {
    config_error("balance targets must be positive");
  }
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) config_error("config must be a JSON object");
  ScenarioConfig c;
  try {
    c.vehicles = range_from(j, "vehicles", c.vehicles);
    c.malicious = range_from(j, "malicious", c.malicious);
    c.data_rate_kbps = range_from(j, "data_rate_kbps", c.data_rate_kbps);
    c.packet_count = range_from(j, "packet_count", c.packet_count);
    c.packet_size_bytes = range_from(j, "packet_size_bytes", c.packet_size_bytes);
    read_if(j, "flows_per_scenario", c.flows_per_scenario);
    read_if(j, "scenario_count", c.scenario_count);
    read_if(j, "sim_duration_s", c.sim_duration_s);
    read_if(j, "seed", c.seed);
    read_if(j, "allow_out_of_range", c.allow_out_of_range);
    if (j.contains("arena")) {
      read_if(j["arena"], "length_m", c.arena_length_m);
      read_if(j["arena"], "width_m", c.arena_width_m);
    }
    if (j.contains("radio")) {
      read_if(j["radio"], "range_m", c.radio.range_m);
      read_if(j["radio"], "bandwidth_bps", c.radio.bandwidth_bps);
      read_if(j["radio"], "prop_delay_per_m", c.radio.prop_delay_per_m);
    }
    if (j.contains("mobility")) c.speed_mps = range_from(j["mobility"], "speed_mps", c.speed_mps);
    if (j.contains("traffic")) {
      read_if(j["traffic"], "start_min_s", c.flow_start_min_s);
      read_if(j["traffic"], "start_max_s", c.flow_start_max_s);
      read_if(j["traffic"], "dst_port", c.dst_port);
      read_if(j["traffic"], "first_ephemeral_port", c.first_ephemeral_port);
    }
    if (j.contains("balance") && j["balance"].is_null()) {
      c.balance.reset();
    } else if (j.contains("balance")) {
      BalanceTarget b;
      read_if(j["balance"], "malicious", b.malicious);
      read_if(j["balance"], "normal", b.normal);
      c.balance = b;
    }
    read_if(j, "split", c.split_fraction);
    read_if(j, "stratified_split", c.stratified_split);
  } catch (const json::exception& e) {
    config_error(e.what());
  }
  validate(c);
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["vehicles"] = range_json(c.vehicles);
  j["malicious"] = range_json(c.malicious);
  j["data_rate_kbps"] = range_json(c.data_rate_kbps);
  j["packet_count"] = range_json(c.packet_count);
  j["packet_size_bytes"] = range_json(c.packet_size_bytes);
  j["flows_per_scenario"] = c.flows_per_scenario;
  j["scenario_count"] = c.scenario_count;
  j["sim_duration_s"] = c.sim_duration_s;
  j["seed"] = c.seed;
  j["allow_out_of_range"] = c.allow_out_of_range;
  j["arena"] = {{"length_m", c.arena_length_m}, {"width_m", c.arena_width_m}};
  j["radio"] = {{"range_m", c.radio.range_m},
                {"bandwidth_bps", c.radio.bandwidth_bps},
                {"prop_delay_per_m", c.radio.prop_delay_per_m}};
  j["mobility"] = {{"speed_mps", range_json(c.speed_mps)}};
  j["traffic"] = {{"start_min_s", c.flow_start_min_s},
                  {"start_max_s", c.flow_start_max_s},
                  {"dst_port", c.dst_port},
                  {"first_ephemeral_port", c.first_ephemeral_port}};
  j["balance"] = c.balance ? json{{"malicious", c.balance->malicious}, {"normal", c.balance->normal}}
                           : json(nullptr);
  j["split"] = c.split_fraction;
  j["stratified_split"] = c.stratified_split;
  return j;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  // A run manifest embeds the config it was produced from.
  if (j.is_object() && j.contains("config") && j.contains("config_digest")) j = j["config"];
  return config_from_json(j);
}

std::string config_digest(const ScenarioConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ScenarioParams sample_scenario(const ScenarioConfig& c, std::uint32_t index) {
  ScenarioParams p;
  p.index = index;
  Rng rng = Rng(c.seed).substream(index);
  p.seed = rng.seed();

  p.vehicles = static_cast<std::uint32_t>(rng.uniform_int(c.vehicles.lo, c.vehicles.hi));
  const std::uint32_t max_malicious = std::min(c.malicious.hi, p.vehicles - 2);
  p.malicious = static_cast<std::uint32_t>(rng.uniform_int(c.malicious.lo, max_malicious));
  p.data_rate_bps =
      1000ULL * static_cast<std::uint64_t>(rng.uniform_int(c.data_rate_kbps.lo, c.data_rate_kbps.hi));
  p.packet_count = static_cast<std::uint32_t>(rng.uniform_int(c.packet_count.lo, c.packet_count.hi));
  p.packet_size_bytes =
      static_cast<std::uint32_t>(rng.uniform_int(c.packet_size_bytes.lo, c.packet_size_bytes.hi));

  for (std::uint32_t n = 0; n < p.vehicles; ++n) {
    Rng node_rng = rng.substream(0x1000 + n);
    p.positions.push_back({node_rng.uniform(0.0, c.arena_length_m), node_rng.uniform(0.0, c.arena_width_m)});
    const double speed = node_rng.uniform(c.speed_mps.lo, c.speed_mps.hi);
    const double direction = node_rng.uniform01() < 0.5 ? -1.0 : 1.0;
    p.velocities.push_back({speed * direction, 0.0});
  }

  std::vector<std::uint32_t> ids(p.vehicles);
  std::iota(ids.begin(), ids.end(), 0u);
  for (std::uint32_t i = 0; i < p.malicious; ++i) {
    std::swap(ids[i], ids[i + rng.uniform_index(p.vehicles - i)]);
  }
  p.blackholes.assign(ids.begin(), ids.begin() + p.malicious);
  std::sort(p.blackholes.begin(), p.blackholes.end());

  std::vector<std::uint32_t> honest;
  for (std::uint32_t n = 0; n < p.vehicles; ++n) {
    if (!std::binary_search(p.blackholes.begin(), p.blackholes.end(), n)) honest.push_back(n);
  }
  std::vector<std::uint16_t> next_port(p.vehicles, c.first_ephemeral_port);
  for (std::uint32_t f = 0; f < c.flows_per_scenario; ++f) {
    const std::uint32_t src = honest[rng.uniform_index(honest.size())];
    std::uint32_t dst = src;
    while (dst == src) dst = honest[rng.uniform_index(honest.size())];
    flowmon::FlowSpec spec;
    spec.src = node_id(src);
    spec.dst = node_id(dst);
    spec.src_port = next_port[src]++;
    spec.dst_port = c.dst_port;
    spec.packet_size_bytes = p.packet_size_bytes;
    spec.data_rate_bps = p.data_rate_bps;
    spec.packet_count = p.packet_count;
    spec.start = SimTime::from_seconds(rng.uniform(c.flow_start_min_s, c.flow_start_max_s));
    p.flows.push_back(spec);
  }
  return p;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const ScenarioParams& params,
                            bool keep_logs) {
  Simulator sim(config.radio);
  std::vector<aodv::Behavior> behaviors(params.vehicles, aodv::Behavior::Honest);
  for (std::uint32_t b : params.blackholes) behaviors[b] = aodv::Behavior::Blackhole;
  for (std::uint32_t n = 0; n < params.vehicles; ++n) {
    sim.add_node(params.positions[n], params.velocities[n]);
  }
  flowmon::FlowMonitor monitor;
  aodv::Router router(sim, behaviors, aodv::Config{},
                      flowmon::TrafficGenerator::callbacks_for(monitor));
  flowmon::TrafficGenerator traffic(sim, router, monitor);
  for (const auto& spec : params.flows) traffic.start_flow(spec);

  const SimTime end = SimTime::from_seconds(config.sim_duration_s);
  sim.run_until(end);

  ScenarioResult result;
  result.params = params;
  result.records = monitor.finalize(end);
  result.events = sim.executed();
  if (keep_logs) {
    result.observations = monitor.log();
    result.transmissions = router.tx_log();
  }
  return result;
}

std::vector<ScenarioResult> run_sweep(const ScenarioConfig& config, unsigned threads,
                                      bool keep_logs) {
  validate(config);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::uint32_t n = config.scenario_count;
  std::vector<ScenarioResult> results(n);
  auto work = [&](std::uint32_t first, std::uint32_t stride) {
    for (std::uint32_t i = first; i < n; i += stride) {
      results[i] = run_scenario(config, sample_scenario(config, i), keep_logs);
    }
  };
  if (threads == 1) {
    work(0, 1);
    return results;
  }
  std::vector<std::future<void>> jobs;
  for (unsigned t = 0; t < threads; ++t) jobs.push_back(std::async(std::launch::async, work, t, threads));
  for (auto& j : jobs) j.get();
  return results;
}

json params_to_json(const ScenarioParams& p) {
  json flows = json::array();
  for (const auto& f : p.flows) {
    flows.push_back({{"src", index_of(f.src)},
                     {"dst", index_of(f.dst)},
                     {"src_port", f.src_port},
                     {"dst_port", f.dst_port},
                     {"start_ns", f.start.nanos()}});
  }
  return {{"index", p.index},
          {"seed", p.seed},
          {"vehicles", p.vehicles},
          {"malicious", p.malicious},
          {"blackholes", p.blackholes},
          {"data_rate_bps", p.data_rate_bps},
          {"packet_count", p.packet_count},
          {"packet_size_bytes", p.packet_size_bytes},
          {"flows", flows}};
}

}  // namespace bhlab
