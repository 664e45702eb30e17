#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhlab/aodv.hpp"
#include "bhlab/engine.hpp"
#include "bhlab/flowmon.hpp"

namespace bhlab {

template <typename T>
struct Range {
  T lo{};
  T hi{};
  bool operator==(const Range&) const = default;
};

struct BalanceTarget {
  std::size_t malicious = 500;
  std::size_t normal = 1500;
  bool operator==(const BalanceTarget&) const = default;
};

/// Sweep configuration. Parameter ranges default to the simulation table of
/// the original study (10-65 vehicles, 1-10 attackers, 600-1800 kbps,
/// 7-70 packets, 1024-1800 byte packets).
struct ScenarioConfig {
  Range<std::uint32_t> vehicles{10, 65};
  Range<std::uint32_t> malicious{1, 10};
  Range<std::uint32_t> data_rate_kbps{600, 1800};
  Range<std::uint32_t> packet_count{7, 70};
  Range<std::uint32_t> packet_size_bytes{1024, 1800};
  std::uint32_t flows_per_scenario = 10;
  std::uint32_t scenario_count = 1500;
  double sim_duration_s = 30.0;
  std::uint64_t seed = 1;

  double arena_length_m = 1000.0;
  double arena_width_m = 50.0;
  Range<double> speed_mps{0.0, 0.0};
  RadioConfig radio;
  double flow_start_min_s = 1.0;
  double flow_start_max_s = 5.0;
  std::uint16_t dst_port = 9;
  std::uint16_t first_ephemeral_port = 49153;

  std::optional<BalanceTarget> balance = BalanceTarget{};
  double split_fraction = 0.6;
  bool stratified_split = false;
  /// Ignore the default parameter-range limits.
  bool allow_out_of_range = false;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ConfigError.
void validate(const ScenarioConfig& config);
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ScenarioConfig& config);
ScenarioConfig load_config(const std::string& path);
/// FNV-1a 64 of the canonical JSON serialization, as 16 hex digits.
std::string config_digest(const ScenarioConfig& config);

/// Parameters drawn for one scenario.
struct ScenarioParams {
  std::uint32_t index = 0;
  std::uint64_t seed = 0;
  std::uint32_t vehicles = 0;
  std::uint32_t malicious = 0;
  std::uint64_t data_rate_bps = 0;
  std::uint32_t packet_count = 0;
  std::uint32_t packet_size_bytes = 0;
  std::vector<std::uint32_t> blackholes;
  std::vector<Position> positions;
  std::vector<Velocity> velocities;
  std::vector<flowmon::FlowSpec> flows;
};

ScenarioParams sample_scenario(const ScenarioConfig& config, std::uint32_t index);

struct ScenarioResult {
  ScenarioParams params;
  std::vector<flowmon::FlowRecord> records;
  std::vector<flowmon::FlowObservation> observations;
  std::vector<aodv::TxRecord> transmissions;
  std::size_t events = 0;
};

/// Builds the network described by `params`, runs it for the configured
/// duration and finalizes the flow records.
ScenarioResult run_scenario(const ScenarioConfig& config, const ScenarioParams& params,
                            bool keep_logs = false);

/// Runs scenario_count scenarios (in parallel when `threads` > 1) and returns
/// them in index order.
std::vector<ScenarioResult> run_sweep(const ScenarioConfig& config, unsigned threads = 0,
                                      bool keep_logs = false);

nlohmann::json params_to_json(const ScenarioParams& params);

}  // namespace bhlab
