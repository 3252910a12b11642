// Builds the two-factor chain map in code, runs a what-if impulse, and asks
// which impulse on production reaches a desired quality-of-life change.

#include <iostream>

#include "fcm/fcm.hpp"

int main() {
  using namespace fcm;

  const auto map = build_map({{"p", "production", FactorKind::control, {}}, {"q", "quality of life", FactorKind::target, {}}},
                             {{"p", "q", 0.5}}, {"chain", "1", {}});

  Scenario push;
  push.name = "push production";
  push.controls = {"p"};
  push.schedule[0]["p"] = 1.0;
  push.horizon = 2;

  const StateVector base{{0.0, 0.0}};
  const auto result = run_scenario(map, base, push);
  std::cout << io::export_trajectory(map, result.trajectory, io::TrajectoryFormat::tabular);
  std::cout << "quality of life changes by " << result.target_delta << "\n";

  const auto inv = invert_scenario(map, {"p"}, {"q", 1.0, 2});
  std::cout << "impulse on production for +1.0: " << inv.impulse[0] << "\n";

  const auto stability = stability_report(map, 1e-6);
  std::cout << "spectral radius " << stability.spectral_radius << " (" << to_string(stability.classification) << ")\n";
}
