#pragma once
// Multi-robot free-platform assembly: several gait-driven robots coupled only
// through the shared translating platform, plus the reporting helpers used by
// the school scenarios.

#include <Eigen/Dense>
#include <vector>

#include "loco/engine.hpp"
#include "loco/trajectory.hpp"

namespace loco {

struct SchoolRobot {
  RobotParams params;
  // Platform-relative initial pose of the tail wheel contact; alpha comes from
  // the gait at t = 0.
  double x0 = 0.0;
  double y0 = 0.0;
  double theta0 = 0.0;
  GaitSignal gait;
};

struct SchoolSpec {
  std::vector<SchoolRobot> robots;
  double platform_mass = 1.0;
  Eigen::Vector2d platform_velocity0 = Eigen::Vector2d::Zero();
};

EngineConfig build_school(const SchoolSpec& spec);

// Initial (q, qd) for the school: robots from rest relative to the platform,
// joint angles and rates from the gaits at t = 0.
FullState school_initial_state(const SchoolSpec& spec);

// Platform velocity seen in robot i's body frame: f along the heading,
// g transverse to it.
struct BodyFrameVelocity {
  double f;
  double g;
};
BodyFrameVelocity platform_frame_velocities(double theta, double dX, double dY);

// Full state rate under gait-driven joints and a free platform.
Vec coupled_rates(const EngineConfig& cfg, const FullState& s, double t);

struct DisplacementReport {
  std::vector<Eigen::Vector2d> path; // platform-relative tail wheel positions
  Eigen::Vector2d net_vector;
  double net_displacement;
};

DisplacementReport displacement_report(const Trajectory& traj, int robot_index);

/// Straightness of a path at the gait-cycle scale: sample every `stride`-th
// point, then report the max perpendicular deviation from the chord through
// first and last sampled points, as a fraction of the chord length. The
// within-cycle undulation is deliberately ignored.
double chord_deviation_fraction(const std::vector<Eigen::Vector2d>& path, int stride);

} // namespace loco
