#include "bhlab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>

#include "bhlab/error.hpp"
#include "bhlab/rng.hpp"

namespace bhlab::data {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
T parse_integer(std::string_view field, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": '" +
                                            std::string(field) + "' is not a valid integer");
  }
  return value;
}

double parse_real(std::string_view field, std::size_t line_no) {
  double value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty() ||
      !std::isfinite(value)) {
    throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": '" +
                                            std::string(field) + "' is not a finite number");
  }
  return value;
}

int parse_label(std::string_view field, std::size_t line_no) {
  const int label = parse_integer<int>(field, line_no);
  if (label != kNormal && label != kMalicious) {
    throw Error(ErrorCode::SchemaError,
                "line " + std::to_string(line_no) + ": label must be 0 or 1");
  }
  return label;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [](const DatasetRow& r) { return r.label == kMalicious; }));
}

int label_of(const flowmon::FlowRecord& record) {
  return record.blackhole_absorbed >= 1 ? kMalicious : kNormal;
}

DatasetRow to_row(const flowmon::FlowRecord& record) {
  return DatasetRow{record.src_addr, record.dst_addr, record.src_port, record.dst_port,
                    label_of(record)};
}

Dataset label_flows(const std::vector<flowmon::FlowRecord>& records) {
  Dataset ds;
  ds.rows.reserve(records.size());
  for (const auto& r : records) ds.rows.push_back(to_row(r));
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, const SplitSpec& spec) {
  const std::size_t n = ds.rows.size();
  if (n < 2) throw Error(ErrorCode::TooFewRows, "split needs at least 2 rows, got " + std::to_string(n));
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(ErrorCode::OutOfRange, "train fraction must lie in (0, 1)");
  }
  Rng rng(spec.seed);
  Dataset train, test;
  train.provenance = test.provenance = ds.provenance;

  auto take = [&](std::vector<std::size_t> idx) {
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < n_train ? train : test).rows.push_back(ds.rows[idx[i]]);
    }
  };

  if (!spec.stratified) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    take(std::move(idx));
  } else {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (ds.rows[i].label == kMalicious ? pos : neg).push_back(i);
    take(std::move(neg));
    take(std::move(pos));
  }
  return {std::move(train), std::move(test)};
}

Dataset balance(const Dataset& ds, std::size_t target_pos, std::size_t target_neg,
                std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    (ds.rows[i].label == kMalicious ? pos : neg).push_back(i);
  }
  if (pos.size() < target_pos || neg.size() < target_neg) {
    throw Error(ErrorCode::InsufficientClassCount,
                "need " + std::to_string(target_pos) + " malicious / " + std::to_string(target_neg) +
                    " normal, available " + std::to_string(pos.size()) + " / " +
                    std::to_string(neg.size()));
  }
  Rng rng(seed);
  // Partial Fisher-Yates: the first `count` entries form a uniform sample.
  auto sample = [&rng](std::vector<std::size_t>& idx, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    idx.resize(count);
  };
  sample(pos, target_pos);
  sample(neg, target_neg);

  std::vector<std::size_t> chosen = pos;
  chosen.insert(chosen.end(), neg.begin(), neg.end());
  rng.shuffle(std::span<std::size_t>(chosen));

  Dataset out;
  out.provenance = ds.provenance;
  out.rows.reserve(chosen.size());
  for (std::size_t i : chosen) out.rows.push_back(ds.rows[i]);
  return out;
}

void write_csv(const Dataset& ds, std::ostream& out) {
  out << kDatasetHeader << '\n';
  for (const auto& r : ds.rows) {
    out << r.src_addr << ',' << r.dst_addr << ',' << r.src_port << ',' << r.dst_port << ','
        << r.label << '\n';
  }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_csv(ds, out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!read_line(in, line) || line != kDatasetHeader) {
    throw Error(ErrorCode::SchemaError, "expected header '" + std::string(kDatasetHeader) + "'");
  }
  Dataset ds;
  std::size_t line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5) {
      throw Error(ErrorCode::SchemaError,
                  "line " + std::to_string(line_no) + ": expected 5 fields, got " + std::to_string(f.size()));
    }
    ds.rows.push_back(DatasetRow{parse_integer<std::uint32_t>(f[0], line_no),
                                 parse_integer<std::uint32_t>(f[1], line_no),
                                 parse_integer<std::uint16_t>(f[2], line_no),
                                 parse_integer<std::uint16_t>(f[3], line_no),
                                 parse_label(f[4], line_no)});
  }
  return ds;
}

Dataset read_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_csv(in);
}

void write_flows_csv(const std::vector<flowmon::FlowRecord>& records, std::ostream& out) {
  auto opt = [](const std::optional<SimTime>& t) { return t ? t->nanos() : std::int64_t{-1}; };
  out << kFlowsHeader << '\n';
  for (const auto& r : records) {
    out << r.src_addr << ',' << r.dst_addr << ',' << r.src_port << ',' << r.dst_port << ','
        << r.time_first_tx.nanos() << ',' << opt(r.time_first_rx) << ',' << r.time_last_tx.nanos()
        << ',' << opt(r.time_last_rx) << ',' << r.delay_sum_ns << ',' << r.jitter_sum_ns << ','
        << r.last_delay_ns << ',' << r.tx_packets << ',' << r.rx_packets << ',' << r.lost_packets
        << ',' << r.tx_bytes << ',' << r.rx_bytes << ',' << format_double(r.throughput_bps) << ','
        << r.blackhole_absorbed << ',' << label_of(r) << '\n';
  }
}

void write_flows_csv(const std::vector<flowmon::FlowRecord>& records,
                     const std::filesystem::path& path) {
  auto out = open_out(path);
  write_flows_csv(records, out);
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<flowmon::FlowRecord> read_flows_csv(std::istream& in) {
  std::string line;
  if (!read_line(in, line) || line != kFlowsHeader) {
    throw Error(ErrorCode::SchemaError, "expected flows.csv header");
  }
  auto opt = [](std::int64_t ns) -> std::optional<SimTime> {
    if (ns < 0) return std::nullopt;
    return SimTime::from_nanos(ns);
  };
  std::vector<flowmon::FlowRecord> out;
  std::size_t line_no = 1;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 19) {
      throw Error(ErrorCode::SchemaError,
                  "line " + std::to_string(line_no) + ": expected 19 fields, got " + std::to_string(f.size()));
    }
    flowmon::FlowRecord r;
    r.src_addr = parse_integer<std::uint32_t>(f[0], line_no);
    r.dst_addr = parse_integer<std::uint32_t>(f[1], line_no);
    r.src_port = parse_integer<std::uint16_t>(f[2], line_no);
    r.dst_port = parse_integer<std::uint16_t>(f[3], line_no);
    r.time_first_tx = SimTime::from_nanos(parse_integer<std::int64_t>(f[4], line_no));
    r.time_first_rx = opt(parse_integer<std::int64_t>(f[5], line_no));
    r.time_last_tx = SimTime::from_nanos(parse_integer<std::int64_t>(f[6], line_no));
    r.time_last_rx = opt(parse_integer<std::int64_t>(f[7], line_no));
    r.delay_sum_ns = parse_integer<std::int64_t>(f[8], line_no);
    r.jitter_sum_ns = parse_integer<std::int64_t>(f[9], line_no);
    r.last_delay_ns = parse_integer<std::int64_t>(f[10], line_no);
    r.tx_packets = parse_integer<std::uint64_t>(f[11], line_no);
    r.rx_packets = parse_integer<std::uint64_t>(f[12], line_no);
    r.lost_packets = parse_integer<std::uint64_t>(f[13], line_no);
    r.tx_bytes = parse_integer<std::uint64_t>(f[14], line_no);
    r.rx_bytes = parse_integer<std::uint64_t>(f[15], line_no);
    r.throughput_bps = parse_real(f[16], line_no);
    r.blackhole_absorbed = parse_integer<std::uint64_t>(f[17], line_no);
    if (parse_label(f[18], line_no) != label_of(r)) {
      throw Error(ErrorCode::SchemaError,
                  "line " + std::to_string(line_no) + ": label disagrees with blackhole_absorbed");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<flowmon::FlowRecord> read_flows_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_flows_csv(in);
}

Dataset load_any(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string header;
  read_line(in, header);
  in.clear();
  in.seekg(0);
  if (header == kFlowsHeader) return label_flows(read_flows_csv(in));
  return read_csv(in);
}

}  // namespace bhlab::data
