#include "loco/control.hpp"

#include <cmath>
#include <sstream>

namespace loco {

namespace {

// Heading coordinate of the controlled robot (slot 0).
constexpr int kThetaIndex = 3;

void require_controlled_config(const EngineConfig& cfg) {
  if (cfg.platform().mode != PlatformMode::accelerated) {
    throw ValidationError("heading control requires an accelerated platform");
  }
  if (cfg.robots()[0].gait) {
    throw ValidationError("heading control requires a passive robot (no gait) in slot 0");
  }
}

} // namespace

void validate_gains(const TrackingGains& g) {
  std::ostringstream msg;
  if (!(g.d1 > 0.0)) {
    msg << "gains.d1 must be positive (got " << g.d1 << ")";
    throw ValidationError(msg.str());
  }
  if (!(g.d2 > 0.0)) {
    msg << "gains.d2 must be positive (got " << g.d2 << ")";
    throw ValidationError(msg.str());
  }
  if (g.epsilon < 0.0) {
    msg << "gains.epsilon must be nonnegative (got " << g.epsilon << ")";
    throw ValidationError(msg.str());
  }
}

HeadingAffineModel heading_accel_probe(const PinnedSolve& solve) {
  HeadingAffineModel m;
  m.drift = solve.accel({0.0, 0.0})[kThetaIndex];
  m.gain_x = solve.accel({1.0, 0.0})[kThetaIndex] - m.drift;
  m.gain_y = solve.accel({0.0, 1.0})[kThetaIndex] - m.drift;
  return m;
}

HeadingAffineModel heading_accel_probe(const EngineConfig& cfg, const Vec& q,
                                       const Vec& qd, double t) {
  require_controlled_config(cfg);
  return heading_accel_probe(PinnedSolve(cfg, q, qd, t));
}

double commanded_heading_accel(double theta, double theta_rate,
                               const HeadingRefSample& ref, const TrackingGains& gains) {
  return ref.accel - gains.d1 * (theta_rate - ref.rate) - gains.d2 * (theta - ref.angle);
}

PlatformAccel allocate_platform_accel(double u_theta, const HeadingAffineModel& model,
                                      double epsilon) {
  const double c2 = model.gain_x * model.gain_x + model.gain_y * model.gain_y;
  if (c2 + epsilon == 0.0) {
    throw NumericalError(
        "platform allocation undefined: zero heading gains with epsilon = 0");
  }
  const double scale = u_theta / (c2 + epsilon);
  return {scale * model.gain_x, scale * model.gain_y};
}

ControllerOutput controller_step(const PinnedSolve& solve, double theta,
                                 double theta_rate, const HeadingRefSample& ref,
                                 const TrackingGains& gains) {
  ControllerOutput out;
  out.model = heading_accel_probe(solve);
  out.theta_ddot_cmd = commanded_heading_accel(theta, theta_rate, ref, gains);
  out.u_theta = out.theta_ddot_cmd - out.model.drift;
  out.accel = allocate_platform_accel(out.u_theta, out.model, gains.epsilon);
  return out;
}

ControllerOutput controller_step(const EngineConfig& cfg, const Vec& q, const Vec& qd,
                                 double t, const HeadingRefSample& ref,
                                 const TrackingGains& gains) {
  require_controlled_config(cfg);
  validate_gains(gains);
  return controller_step(PinnedSolve(cfg, q, qd, t), q[kThetaIndex], qd[kThetaIndex],
                         ref, gains);
}

WaypointSupervisor::WaypointSupervisor(std::vector<Eigen::Vector2d> targets,
                                       WaypointSettings settings)
    : targets_(std::move(targets)), settings_(settings) {
  if (targets_.empty()) {
    throw ValidationError("waypoint supervisor needs at least one target");
  }
}

double WaypointSupervisor::bearing(double x, double y, double near) const {
  const Eigen::Vector2d& tgt = targets_[std::min<size_t>(active_, targets_.size() - 1)];
  double b = std::atan2(tgt[1] - y, tgt[0] - x);
  // Unwrap onto the branch closest to the filter state.
  while (b - near > M_PI) b -= 2.0 * M_PI;
  while (b - near < -M_PI) b += 2.0 * M_PI;
  return b;
}

Eigen::Vector2d WaypointSupervisor::initial_filter_state(double x, double y) const {
  return {bearing(x, y, 0.0), 0.0};
}

HeadingRefSample WaypointSupervisor::reference(double x, double y, double z,
                                               double w) const {
  if (done()) {
    return {hold_heading_, 0.0, 0.0};
  }
  const double geo = bearing(x, y, z);
  const double rate = (geo - z) / settings_.filter_tau;
  return {geo, rate, (rate - w) / settings_.filter_tau};
}

Eigen::Vector2d WaypointSupervisor::filter_rates(double x, double y, double z,
                                                 double w) const {
  if (done()) {
    return {0.0, -w / settings_.filter_tau};
  }
  const double rate = (bearing(x, y, z) - z) / settings_.filter_tau;
  return {rate, (rate - w) / settings_.filter_tau};
}

void WaypointSupervisor::observe(double t, double x, double y, double theta, double z) {
  if (done()) return;
  const Eigen::Vector2d& tgt = targets_[active_];
  const double dist = (tgt - Eigen::Vector2d(x, y)).norm();

  bool advance = false;
  if (dist == 0.0) {
    advance = true; // at the target exactly, the bearing is degenerate
  } else if (settings_.mode == WaypointMode::position_tol) {
    advance = dist <= settings_.position_radius;
  } else {
    const double err = std::abs(theta - bearing(x, y, z));
    advance = err < settings_.heading_tol && t - last_switch_time_ >= settings_.min_dwell;
  }

  if (advance) {
    ++active_;
    last_switch_time_ = t;
    switch_times_.push_back(t);
    if (done()) hold_heading_ = z;
  }
}

} // namespace loco
