#pragma once

// Impulse processes on a cognitive map.
//
//   O(t+1) = M O(t) + external(t+1)      M = W^T, O'(j) = sum_i w(i->j) O(i)
//   Y(t+1) = Y(t) + O(t+1)
//
// with Y(0) = Y_base + O(0). The model is linear; optional clamping of Y to
// [0, 1] is a presentation aid and leaves the O-series untouched.

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fcm/error.hpp"
#include "fcm/map.hpp"
#include "fcm/matrix.hpp"

namespace fcm {

/// Accumulated factor levels Y(t), index-aligned with the map's factors.
struct StateVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Per-step factor gains O(t).
struct ImpulseVector {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
  friend bool operator==(const ImpulseVector&, const ImpulseVector&) = default;
};

/// External injections by step index.
using ImpulseSchedule = std::map<int, ImpulseVector>;

struct Trajectory {
  int horizon = 0;
  std::vector<StateVector> states;     // Y(0..T)
  std::vector<ImpulseVector> impulses; // O(0..T)

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline void require_aligned(const CognitiveMap& map, std::size_t n, const char* what) {
  if (n != map.size())
    throw Error(ErrorCode::invalid_argument, std::string(what) + " has length " + std::to_string(n) +
                                                 ", map has " + std::to_string(map.size()) + " factors");
}

namespace detail {

// One propagation step using the edge list directly.
inline ImpulseVector propagate(const CognitiveMap& map, const std::vector<std::size_t>& src,
                               const std::vector<std::size_t>& dst, const ImpulseVector& o) {
  ImpulseVector next{std::vector<double>(map.size(), 0.0)};
  const auto& edges = map.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) next[dst[k]] += edges[k].weight * o[src[k]];
  return next;
}

inline void edge_indices(const CognitiveMap& map, std::vector<std::size_t>& src, std::vector<std::size_t>& dst) {
  src.clear();
  dst.clear();
  for (const auto& e : map.edges()) {
    src.push_back(map.require_index(e.source));
    dst.push_back(map.require_index(e.target));
  }
}

}  // namespace detail

inline ImpulseVector impulse_step(const CognitiveMap& map, const ImpulseVector& o) {
  require_aligned(map, o.size(), "impulse vector");
  std::vector<std::size_t> src, dst;
  detail::edge_indices(map, src, dst);
  return detail::propagate(map, src, dst, o);
}

inline ImpulseVector zero_impulse(std::size_t n) { return ImpulseVector{std::vector<double>(n, 0.0)}; }

struct SimulateOptions {
  int horizon = 0;
  bool clamp = false;
};

inline Trajectory simulate(const CognitiveMap& map, const StateVector& base, const ImpulseSchedule& schedule,
                           SimulateOptions options) {
  const int horizon = options.horizon;
  if (horizon < 0) throw Error(ErrorCode::invalid_argument, "negative horizon");
  require_aligned(map, base.size(), "base state");
  for (const auto& [t, o] : schedule) {
    if (t < 0 || t > horizon)
      throw Error(ErrorCode::invalid_argument, "schedule step " + std::to_string(t) + " outside [0, horizon]");
    require_aligned(map, o.size(), "scheduled impulse");
  }
  const std::size_t n = map.size();
  auto external = [&](int t) {
    auto it = schedule.find(t);
    return it == schedule.end() ? zero_impulse(n) : it->second;
  };
  auto clamp = [&](StateVector& y) {
    if (!options.clamp) return;
    for (double& v : y.values) v = std::clamp(v, 0.0, 1.0);
  };

  std::vector<std::size_t> src, dst;
  detail::edge_indices(map, src, dst);

  Trajectory traj;
  traj.horizon = horizon;
  traj.states.reserve(horizon + 1);
  traj.impulses.reserve(horizon + 1);

  ImpulseVector o = external(0);
  StateVector y = base;
  for (std::size_t i = 0; i < n; ++i) y[i] += o[i];
  clamp(y);
  traj.impulses.push_back(o);
  traj.states.push_back(y);

  for (int t = 0; t < horizon; ++t) {
    ImpulseVector next = detail::propagate(map, src, dst, o);
    const ImpulseVector inject = external(t + 1);
    for (std::size_t i = 0; i < n; ++i) next[i] += inject[i];
    for (std::size_t i = 0; i < n; ++i) y[i] += next[i];
    clamp(y);
    o = std::move(next);
    traj.impulses.push_back(o);
    traj.states.push_back(y);
  }
  return traj;
}

/// Sum_{t=0..T} M^t, built from explicit matrix powers.
inline Matrix propagation_sum(const CognitiveMap& map, int horizon) {
  if (horizon < 0) throw Error(ErrorCode::invalid_argument, "negative horizon");
  const Matrix m = map.propagation_operator();
  Matrix power = Matrix::identity(map.size());
  Matrix sum = power;
  for (int t = 1; t <= horizon; ++t) {
    power = m * power;
    sum += power;
  }
  return sum;
}

/// Y(T) - Y_base for a single initial impulse, without clamping.
inline StateVector closed_form_state(const CognitiveMap& map, const ImpulseVector& initial, int horizon) {
  require_aligned(map, initial.size(), "impulse vector");
  return StateVector{propagation_sum(map, horizon) * std::span<const double>(initial.values)};
}

}  // namespace fcm
