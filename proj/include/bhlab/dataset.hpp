#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bhlab/flowmon.hpp"

namespace bhlab::data {

inline constexpr int kNormal = 0;
inline constexpr int kMalicious = 1;

/// The four classification features plus the binary label.
struct DatasetRow {
  std::uint32_t src_addr = 0;
  std::uint32_t dst_addr = 0;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  int label = kNormal;
  bool operator==(const DatasetRow&) const = default;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> scenario_ids;
  bool operator==(const Provenance&) const = default;
};

struct Dataset {
  std::vector<DatasetRow> rows;
  Provenance provenance;

  std::size_t positives() const;
  std::size_t negatives() const { return rows.size() - positives(); }
};

struct SplitSpec {
  double train_fraction = 0.6;
  std::uint64_t seed = 0;
  bool stratified = false;
};

/// Label is malicious iff a blackhole absorbed at least one packet.
int label_of(const flowmon::FlowRecord& record);
DatasetRow to_row(const flowmon::FlowRecord& record);
Dataset label_flows(const std::vector<flowmon::FlowRecord>& records);

/// Uniform random permutation, first round(fraction * N) rows go to train.
std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec);

/// Per-class subsample without replacement, then a deterministic shuffle.
Dataset balance(const Dataset& ds, std::size_t target_pos, std::size_t target_neg,
                std::uint64_t seed);

inline constexpr const char* kDatasetHeader = "src_addr,dst_addr,src_port,dst_port,label";
inline constexpr const char* kFlowsHeader =
    "src_addr,dst_addr,src_port,dst_port,time_first_tx_ns,time_first_rx_ns,time_last_tx_ns,"
    "time_last_rx_ns,delay_sum_ns,jitter_sum_ns,last_delay_ns,tx_packets,rx_packets,"
    "lost_packets,tx_bytes,rx_bytes,throughput_bps,blackhole_absorbed,label";

void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);

/// flows.csv: unset rx timestamps are written as -1.
void write_flows_csv(const std::vector<flowmon::FlowRecord>& records, std::ostream& out);
void write_flows_csv(const std::vector<flowmon::FlowRecord>& records,
                     const std::filesystem::path& path);
std::vector<flowmon::FlowRecord> read_flows_csv(std::istream& in);
std::vector<flowmon::FlowRecord> read_flows_csv(const std::filesystem::path& path);

/// Reads either dataset.csv or flows.csv, chosen by the header line.
Dataset load_any(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace bhlab::data
