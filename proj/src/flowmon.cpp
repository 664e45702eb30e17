#include "bhlab/flowmon.hpp"

#include <cstdlib>
#include <string>

#include "bhlab/error.hpp"

namespace bhlab::flowmon {

SimTime FlowSpec::interval() const {
  const auto ns = static_cast<unsigned __int128>(packet_size_bytes) * 8u * 1'000'000'000u /
                  data_rate_bps;
  return SimTime::from_nanos(static_cast<std::int64_t>(ns));
}

FlowMonitor::FlowState& FlowMonitor::flow(const FlowKey& key) {
  auto [it, inserted] = index_.try_emplace(key, flows_.size());
  if (inserted) {
    FlowState st;
    st.record.src_addr = key.src_addr;
    st.record.dst_addr = key.dst_addr;
    st.record.src_port = key.src_port;
    st.record.dst_port = key.dst_port;
    flows_.push_back(std::move(st));
  }
  return flows_[it->second];
}

void FlowMonitor::observe(const FlowObservation& o) {
  FlowState& fs = flow(o.key);
  FlowRecord& r = fs.record;

  if (o.kind == ObservationKind::Tx) {
    if (fs.packets.contains(o.seq)) {
      throw Error(ErrorCode::DuplicateTerminal, "second Tx for packet " + std::to_string(o.seq));
    }
    fs.packets.emplace(o.seq, PacketState{o.time, o.size_bytes, false});
    if (!fs.any_tx || o.time < r.time_first_tx) r.time_first_tx = o.time;
    if (!fs.any_tx || o.time > r.time_last_tx) r.time_last_tx = o.time;
    fs.any_tx = true;
    r.tx_packets += 1;
    r.tx_bytes += o.size_bytes;
    log_.push_back(o);
    return;
  }

  auto it = fs.packets.find(o.seq);
  if (it == fs.packets.end()) {
    throw Error(ErrorCode::InvalidSpec, "terminal observation without Tx for packet " +
                                            std::to_string(o.seq));
  }
  if (it->second.terminated) {
    throw Error(ErrorCode::DuplicateTerminal, "packet " + std::to_string(o.seq));
  }
  it->second.terminated = true;

  if (o.kind == ObservationKind::Rx) {
    const std::int64_t delay = (o.time - it->second.tx_time).nanos();
    if (!r.time_first_rx) r.time_first_rx = o.time;
    r.time_last_rx = o.time;
    r.delay_sum_ns += delay;
    if (fs.previous_delay) r.jitter_sum_ns += std::llabs(delay - *fs.previous_delay);
    fs.previous_delay = delay;
    r.last_delay_ns = delay;
    r.rx_packets += 1;
    r.rx_bytes += o.size_bytes;
  } else {
    r.lost_packets += 1;
    if (o.cause == DropCause::BlackholeAbsorbed) r.blackhole_absorbed += 1;
  }
  log_.push_back(o);
}

std::vector<FlowRecord> FlowMonitor::finalize(SimTime end) {
  for (auto& [key, idx] : index_) {
    for (auto& [seq, pkt] : flows_[idx].packets) {
      if (!pkt.terminated) {
        observe(FlowObservation{ObservationKind::Drop, DropCause::EndOfSim, key, seq, end,
                                pkt.size_bytes});
      }
    }
  }
  std::vector<FlowRecord> out;
  out.reserve(flows_.size());
  for (FlowState& fs : flows_) {
    FlowRecord& r = fs.record;
    r.throughput_bps = 0.0;
    if (r.rx_packets > 0 && r.time_last_rx) {
      const double window = (*r.time_last_rx - r.time_first_tx).seconds();
      if (window > 0.0) r.throughput_bps = static_cast<double>(r.rx_bytes) * 8.0 / window;
    }
    out.push_back(r);
  }
  return out;
}

aodv::DataCallbacks TrafficGenerator::callbacks_for(FlowMonitor& monitor) {
  aodv::DataCallbacks cb;
  cb.delivered = [&monitor](const DataPacket& pkt, SimTime at) {
    monitor.observe(
        FlowObservation{ObservationKind::Rx, DropCause::NoRoute, pkt.key, pkt.seq, at, pkt.size_bytes});
  };
  cb.dropped = [&monitor](const DataPacket& pkt, DropCause cause, SimTime at) {
    monitor.observe(
        FlowObservation{ObservationKind::Drop, cause, pkt.key, pkt.seq, at, pkt.size_bytes});
  };
  return cb;
}

void TrafficGenerator::start_flow(const FlowSpec& spec) {
  if (spec.src == spec.dst) throw Error(ErrorCode::InvalidSpec, "flow source equals destination");
  if (spec.packet_size_bytes == 0 || spec.data_rate_bps == 0 || spec.packet_count == 0) {
    throw Error(ErrorCode::InvalidSpec, "flow size, rate and count must be positive");
  }
  sim_.position_at(spec.src, spec.start);
  sim_.position_at(spec.dst, spec.start);

  const SimTime gap = spec.interval();
  const FlowKey key = spec.key();
  for (std::uint32_t i = 0; i < spec.packet_count; ++i) {
    const SimTime at = spec.start + SimTime::from_nanos(gap.nanos() * i);
    sim_.schedule(
        at,
        [this, spec, key, i] {
          DataPacket pkt{key, i, spec.src, spec.dst, spec.packet_size_bytes, sim_.now()};
          monitor_.observe(FlowObservation{ObservationKind::Tx, DropCause::NoRoute, key, i,
                                           sim_.now(), spec.packet_size_bytes});
          router_.send(pkt);
        },
        spec.src);
  }
}

}  // namespace bhlab::flowmon
