#pragma once

// What-if scenarios against a target factor: run, rank, invert.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fcm/dynamics.hpp"
#include "fcm/error.hpp"
#include "fcm/map.hpp"

namespace fcm {

struct Scenario {
  std::string name;
  std::set<FactorId> controls;
  // Per step, impulse values by control factor id.
  std::map<int, std::map<FactorId, double>> schedule;
  int horizon = 1;
  bool clamp = false;
};

struct TargetSpec {
  FactorId target;
  double desired_delta = 0.0;
  int horizon = 1;
};

struct ScenarioResult {
  Trajectory trajectory;
  double target_delta = 0.0;
  std::vector<double> final_delta;  // Y(T) - Y_base per factor
};

inline std::size_t require_target(const CognitiveMap& map, std::string_view id) {
  const std::size_t i = map.require_index(id);
  if (map.factors()[i].kind != FactorKind::target)
    throw Error(ErrorCode::invalid_argument, "factor is not a target: " + std::string(id));
  return i;
}

/// The map's target factor. Maps without one cannot run scenarios.
inline std::size_t default_target(const CognitiveMap& map) {
  if (auto t = map.target_index()) return *t;
  throw Error(ErrorCode::not_found, "map has no target factor");
}

inline ImpulseSchedule to_impulse_schedule(const CognitiveMap& map, const Scenario& scenario) {
  if (scenario.horizon < 1) throw Error(ErrorCode::invalid_argument, "scenario horizon must be >= 1");
  for (const auto& c : scenario.controls) {
    if (map.factor(c).kind != FactorKind::control)
      throw Error(ErrorCode::invalid_argument, "not a control factor: " + c);
  }
  ImpulseSchedule out;
  for (const auto& [t, values] : scenario.schedule) {
    ImpulseVector o = zero_impulse(map.size());
    for (const auto& [id, v] : values) {
      const std::size_t i = map.require_index(id);
      if (v != 0.0 && (!scenario.controls.contains(id) || map.factors()[i].kind != FactorKind::control))
        throw Error(ErrorCode::invalid_argument,
                    "scenario " + scenario.name + " injects into non-control factor " + id);
      o[i] = v;
    }
    out[t] = std::move(o);
  }
  return out;
}

inline ScenarioResult run_scenario(const CognitiveMap& map, const StateVector& base, const Scenario& scenario) {
  const std::size_t target = default_target(map);
  const auto schedule = to_impulse_schedule(map, scenario);
  ScenarioResult result;
  result.trajectory = simulate(map, base, schedule, {scenario.horizon, scenario.clamp});
  const auto& final_state = result.trajectory.states.back();
  result.final_delta.resize(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) result.final_delta[i] = final_state[i] - base[i];
  result.target_delta = result.final_delta[target];
  return result;
}

struct RankedScenario {
  std::string name;
  double target_delta = 0.0;
  double distance = 0.0;
};

inline std::vector<RankedScenario> compare_scenarios(const CognitiveMap& map, const StateVector& base,
                                                     const std::vector<Scenario>& scenarios,
                                                     const TargetSpec& spec) {
  require_target(map, spec.target);
  std::vector<RankedScenario> ranking;
  ranking.reserve(scenarios.size());
  for (const auto& s : scenarios) {
    if (s.horizon != spec.horizon)
      throw Error(ErrorCode::invalid_argument, "scenario " + s.name + " horizon " + std::to_string(s.horizon) +
                                                   " differs from target horizon " + std::to_string(spec.horizon));
    const auto r = run_scenario(map, base, s);
    ranking.push_back({s.name, r.target_delta, std::abs(r.target_delta - spec.desired_delta)});
  }
  std::sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.name < b.name;
  });
  return ranking;
}

/// Gradient of Y_target(T) with respect to an initial impulse: the target
/// row of sum_{t=0..T} M^t, accumulated as r <- r M without forming powers.
inline std::vector<double> sensitivity(const CognitiveMap& map, const TargetSpec& spec) {
  const std::size_t target = map.require_index(spec.target);
  if (spec.horizon < 0) throw Error(ErrorCode::invalid_argument, "negative horizon");
  const std::size_t n = map.size();
  std::vector<double> row(n, 0.0), total(n, 0.0);
  row[target] = 1.0;
  total[target] = 1.0;
  // (r M)(i) = sum_j r(j) M(j, i) = sum_j r(j) w(i -> j)
  for (int t = 1; t <= spec.horizon; ++t) {
    std::vector<double> next(n, 0.0);
    for (const auto& e : map.edges())
      next[map.require_index(e.source)] += row[map.require_index(e.target)] * e.weight;
    row = std::move(next);
    for (std::size_t i = 0; i < n; ++i) total[i] += row[i];
  }
  return total;
}

inline constexpr double kZeroGain = 1e-12;

struct Inversion {
  std::vector<FactorId> controls;
  std::vector<double> impulse;      // per control, same order
  std::vector<double> gains;        // d Y_target(T) / d o_c
  double achieved_delta = 0.0;
  double residual = 0.0;            // achieved - desired
};

/// Single initial impulse on the controls minimising
/// (g.o - desired)^2 + ridge |o|^2.
///
/// With one equation the normal equations collapse to
/// o = g desired / (|g|^2 + ridge), which at ridge = 0 is the minimum-norm
/// exact solution.
inline Inversion invert_scenario(const CognitiveMap& map, const std::vector<FactorId>& controls,
                                 const TargetSpec& spec, double ridge = 0.0) {
  if (controls.empty()) throw Error(ErrorCode::invalid_argument, "no control factors");
  if (ridge < 0.0 || !std::isfinite(ridge)) throw Error(ErrorCode::invalid_argument, "ridge must be >= 0");
  require_target(map, spec.target);
  for (const auto& c : controls)
    if (map.factor(c).kind != FactorKind::control)
      throw Error(ErrorCode::invalid_argument, "not a control factor: " + c);

  const auto grad = sensitivity(map, spec);
  Inversion inv;
  inv.controls = controls;
  double gg = 0.0, max_gain = 0.0;
  for (const auto& c : controls) {
    const double g = grad[map.require_index(c)];
    inv.gains.push_back(g);
    gg += g * g;
    max_gain = std::max(max_gain, std::abs(g));
  }
  if (max_gain < kZeroGain) {
    if (spec.desired_delta != 0.0)
      throw Error(ErrorCode::unreachable, "target " + spec.target + " is unreachable from the controls");
    inv.impulse.assign(controls.size(), 0.0);
    return inv;
  }
  const double scale = spec.desired_delta / (gg + ridge);
  for (double g : inv.gains) inv.impulse.push_back(g * scale);
  for (std::size_t k = 0; k < controls.size(); ++k) inv.achieved_delta += inv.gains[k] * inv.impulse[k];
  inv.residual = inv.achieved_delta - spec.desired_delta;
  return inv;
}

/// Scenario replaying an inversion result as a t = 0 impulse.
inline Scenario scenario_from_inversion(const Inversion& inv, int horizon, std::string name = "inverted") {
  Scenario s;
  s.name = std::move(name);
  s.horizon = horizon;
  s.controls.insert(inv.controls.begin(), inv.controls.end());
  for (std::size_t k = 0; k < inv.controls.size(); ++k) s.schedule[0][inv.controls[k]] = inv.impulse[k];
  return s;
}

}  // namespace fcm
