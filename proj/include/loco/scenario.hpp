#pragma once
// Named simulation scenarios: the built-in set the CLI exposes, JSON
// round-tripping with overlay support for user overrides, the integration
// driver that produces trajectories with per-sample diagnostics, and the
// reduced-vs-engine cross-check.

#include <optional>
#include <string>
#include <vector>

#include "loco/control.hpp"
#include "loco/engine.hpp"
#include "loco/integrate.hpp"
#include "loco/svgplot.hpp"
#include "loco/trajectory.hpp"

namespace loco {

enum class Topology {
  stationary,          // robots on fixed ground, gait-driven or sprung
  school,              // gait-driven robots coupled through a free platform
  controlled_platform, // passive robot steered by commanded platform acceleration
};

std::string topology_name(Topology t);
Topology topology_from_name(const std::string& name);

// One robot in a scenario. Gait-driven joints follow the gait; passive joints
// start at alpha0, optionally on a steady rolling orbit with turn rate
// theta_rate0 (used so controlled runs start consistent with the reference).
struct RobotSetup {
  RobotParams params;
  std::optional<GaitSignal> gait;
  double x0 = 0.0;
  double y0 = 0.0;
  double theta0 = 0.0;
  double alpha0 = 0.0;
  bool rolling_start = false;
  double theta_rate0 = 0.0;
};

// Heading reference for controlled-platform scenarios.
struct HeadingRefSpec {
  enum class Kind { ramp, sine, waypoints };
  Kind kind = Kind::ramp;
  double rate = 1.0;      // ramp: theta_d(t) = theta_offset + rate * t
  double theta_offset = 0.0;
  double amplitude = 0.0; // sine: theta_d(t) = amplitude * sin(omega * t)
  double omega = 1.0;
  std::vector<Eigen::Vector2d> targets; // waypoints, visited in order
  WaypointSettings waypoints;
  double settle_time = 5.0; // keep integrating this long after the last target

  HeadingRefSample sample(double t) const; // ramp and sine only
};

struct Scenario {
  std::string name;
  std::string summary;
  Topology topology = Topology::stationary;
  std::vector<RobotSetup> robots;
  double platform_mass = 1.0; // free platform only; pinned modes ignore it
  double duration = 10.0;
  double output_dt = 0.01;
  IntegratorSpec integrator;
  TrackingGains gains;      // controlled_platform only
  HeadingRefSpec reference; // controlled_platform only

  EngineConfig engine_config() const;
  FullState initial_state() const; // constraint-consistent velocities
};

// Structural checks beyond what EngineConfig enforces: topology/gait
// consistency, integrator and gain sanity, waypoint settings.
void validate_scenario(const Scenario& sc);

struct RunResult {
  Trajectory trajectory;
  long steps_accepted = 0;
  long steps_rejected = 0;
  bool stopped_early = false;       // waypoint runs stop once settled
  bool targets_done = false;        // waypoint runs: every target reached
  std::vector<double> switch_times; // waypoint arrival times
};

RunResult run_scenario(const Scenario& sc);

// Integrates the same single-robot stationary-platform gait through the
// reduced momentum form and through the full engine, on a shared output grid.
struct CompareReport {
  double max_pose_gap = 0.0;     // sup over the grid, all of alpha, x, y, theta
  double max_momentum_rel = 0.0; // relative p gap where |sin alpha| > exclusion
  int samples = 0;
  int momentum_samples = 0;
};

CompareReport compare_reduced_engine(const RobotParams& params, const GaitSignal& gait,
                                     double horizon, double exclusion);

// Built-in registry. builtin_scenario throws ValidationError naming the
// available scenarios when the name is unknown.
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

// JSON config documents. scenario_to_json emits the complete tree;
// scenario_from_json requires a complete document (missing keys take the
// field defaults above); apply_overlay deep-merges an override document into
// the serialized base. Object arrays of equal length merge element-wise,
// otherwise the override replaces the array.
std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);
Scenario apply_overlay(const Scenario& base, const std::string& overlay_text);

// Figure assembly for the `figures` and `run --svg` commands.
std::vector<PlotPanel> figure_panels(const Scenario& sc, const RunResult& result);

} // namespace loco
