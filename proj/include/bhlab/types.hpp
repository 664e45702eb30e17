#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>

namespace bhlab {

/// Virtual time in integer nanoseconds.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_nanos(std::int64_t ns) { return SimTime(ns); }
  static constexpr SimTime from_millis(std::int64_t ms) { return SimTime(ms * 1'000'000); }
  static constexpr SimTime from_secs(std::int64_t s) { return SimTime(s * 1'000'000'000); }
  // Floors to the nanosecond grid.
  static SimTime from_seconds(double s) {
    return SimTime(static_cast<std::int64_t>(std::floor(s * 1e9)));
  }

  constexpr std::int64_t nanos() const { return ns_; }
  constexpr double seconds() const { return static_cast<double>(ns_) * 1e-9; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(ns_ + o.ns_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(ns_ - o.ns_); }
  constexpr SimTime& operator+=(SimTime o) {
    ns_ += o.ns_;
    return *this;
  }

 private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

/// Dense vehicle identifier 0..N-1.
enum class NodeId : std::uint32_t {};

constexpr std::uint32_t index_of(NodeId n) { return static_cast<std::uint32_t>(n); }
constexpr NodeId node_id(std::uint32_t i) { return static_cast<NodeId>(i); }

/// 10.1.1.(n+1) as a 32-bit big-endian integer.
constexpr std::uint32_t node_address(NodeId n) {
  return (10u << 24) + (1u << 16) + (1u << 8) + index_of(n) + 1u;
}

struct Position {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Position&) const = default;
};

struct Velocity {
  double vx = 0.0;
  double vy = 0.0;
};

inline double distance(Position a, Position b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace bhlab
