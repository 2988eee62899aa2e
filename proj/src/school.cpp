#include "loco/school.hpp"

#include <cmath>
#include <sstream>

namespace loco {

EngineConfig build_school(const SchoolSpec& spec) {
  std::vector<RobotSlot> slots;
  slots.reserve(spec.robots.size());
  for (const SchoolRobot& r : spec.robots) {
    slots.push_back({r.params, r.gait});
  }
  PlatformParams platform;
  platform.mode = PlatformMode::free_floating;
  platform.mass = spec.platform_mass;
  return EngineConfig(std::move(slots), platform);
}

FullState school_initial_state(const SchoolSpec& spec) {
  const int n = static_cast<int>(spec.robots.size());
  FullState s;
  s.q = Vec::Zero(4 * n + 2);
  s.qd = Vec::Zero(4 * n + 2);
  for (int i = 0; i < n; ++i) {
    const SchoolRobot& r = spec.robots[i];
    const GaitSample g = gait_eval(r.gait, 0.0);
    s.q[4 * i] = g.angle;
    s.q[4 * i + 1] = r.x0;
    s.q[4 * i + 2] = r.y0;
    s.q[4 * i + 3] = r.theta0;
    s.qd[4 * i] = g.rate;
  }
  s.qd[4 * n] = spec.platform_velocity0[0];
  s.qd[4 * n + 1] = spec.platform_velocity0[1];
  return s;
}

BodyFrameVelocity platform_frame_velocities(double theta, double dX, double dY) {
  return {dX * std::cos(theta) + dY * std::sin(theta),
          -dX * std::sin(theta) + dY * std::cos(theta)};
}

Vec coupled_rates(const EngineConfig& cfg, const FullState& s, double t) {
  Vec rate(2 * cfg.coord_count());
  rate.head(cfg.coord_count()) = s.qd;
  rate.tail(cfg.coord_count()) = constrained_accel(cfg, s.q, s.qd, t).accel;
  return rate;
}

DisplacementReport displacement_report(const Trajectory& traj, int robot_index) {
  if (robot_index < 0 || robot_index >= traj.robot_count) {
    std::ostringstream msg;
    msg << "robot index " << robot_index << " out of range (have "
        << traj.robot_count << ")";
    throw ValidationError(msg.str());
  }
  DisplacementReport rep;
  rep.path.reserve(traj.samples.size());
  for (const TrajectorySample& s : traj.samples) {
    rep.path.emplace_back(s.q[4 * robot_index + 1], s.q[4 * robot_index + 2]);
  }
  rep.net_vector = rep.path.empty() ? Eigen::Vector2d::Zero()
                                    : Eigen::Vector2d(rep.path.back() - rep.path.front());
  rep.net_displacement = rep.net_vector.norm();
  return rep;
}

double chord_deviation_fraction(const std::vector<Eigen::Vector2d>& path, int stride) {
  if (path.size() < 2 || stride < 1) return 0.0;
  std::vector<Eigen::Vector2d> pts;
  for (size_t i = 0; i < path.size(); i += stride) pts.push_back(path[i]);
  if (pts.back() != path.back()) pts.push_back(path.back());

  const Eigen::Vector2d chord = pts.back() - pts.front();
  const double len = chord.norm();
  if (len == 0.0) return 0.0;
  const Eigen::Vector2d n(-chord[1] / len, chord[0] / len);
  double worst = 0.0;
  for (const Eigen::Vector2d& p : pts) {
    worst = std::max(worst, std::abs(n.dot(p - pts.front())));
  }
  return worst / len;
}

} // namespace loco
