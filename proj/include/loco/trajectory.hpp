#pragma once
// Time-stamped state sequence with per-sample conservation diagnostics, the
// common currency between scenario runs, CSV output, and plots.

#include <Eigen/Dense>
#include <vector>

namespace loco {

struct TrajectorySample {
  double t = 0.0;
  Eigen::VectorXd q;  // engine coordinate layout
  Eigen::VectorXd qd;
  double e_kin = 0.0;
  double e_pot = 0.0;
  Eigen::Vector2d momentum = Eigen::Vector2d::Zero();
  double c_res = 0.0; // max normalized wheel-constraint residual
  // Controller internals, meaningful when Trajectory::has_control.
  double theta_d = 0.0;
  double u_theta = 0.0;
  double c_x = 0.0;
  double c_y = 0.0;
};

struct Trajectory {
  int robot_count = 1;
  bool has_platform_coords = false;
  bool has_control = false;
  std::vector<TrajectorySample> samples;

  // Inertial platform position/velocity for a sample; zero for stationary runs.
  Eigen::Vector2d platform_position(const TrajectorySample& s) const {
    if (!has_platform_coords) return Eigen::Vector2d::Zero();
    return s.q.segment<2>(4 * robot_count);
  }
  Eigen::Vector2d platform_velocity(const TrajectorySample& s) const {
    if (!has_platform_coords) return Eigen::Vector2d::Zero();
    return s.qd.segment<2>(4 * robot_count);
  }
};

} // namespace loco
