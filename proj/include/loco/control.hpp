#pragma once
// Heading control of a passive robot through commanded platform acceleration:
// probe-based extraction of the control-affine heading acceleration, the
// feedback-linearizing tracking law, the regularized minimum-norm allocation,
// and the waypoint supervisor that turns target points into heading references.

#include <Eigen/Dense>
#include <vector>

#include "loco/engine.hpp"

namespace loco {

// theta_ddot = drift + gain_x * ax + gain_y * ay for commanded platform
// acceleration (ax, ay); exact because the constrained solve is affine in the
// pinned accelerations.
struct HeadingAffineModel {
  double drift = 0.0;
  double gain_x = 0.0;
  double gain_y = 0.0;
};

struct TrackingGains {
  double d1 = 2.0;      // rate gain, 1/s
  double d2 = 1.0;      // position gain, 1/s^2
  double epsilon = 1e-6; // allocation regularizer
};

void validate_gains(const TrackingGains& g);

struct HeadingRefSample {
  double angle = 0.0;
  double rate = 0.0;
  double accel = 0.0;
};

// Three constrained solves sharing one factorization: zero input for drift,
// unit x and unit y inputs for the gains. Requires an accelerated-platform
// config with the controlled robot in slot 0.
HeadingAffineModel heading_accel_probe(const EngineConfig& cfg, const Vec& q,
                                       const Vec& qd, double t);
HeadingAffineModel heading_accel_probe(const PinnedSolve& solve);

// theta_ddot_cmd = ref.accel - d1*(rate - ref.rate) - d2*(theta - ref.angle),
// with theta unwrapped by the caller.
double commanded_heading_accel(double theta, double theta_rate,
                               const HeadingRefSample& ref, const TrackingGains& gains);

// Minimum-norm platform acceleration producing heading acceleration effect
// u_theta: u * c / (|c|^2 + epsilon). With epsilon = 0 the effect is exact;
// with c = 0 and epsilon > 0 the result is zero (authority lost, no blowup).
PlatformAccel allocate_platform_accel(double u_theta, const HeadingAffineModel& model,
                                      double epsilon);

struct ControllerOutput {
  PlatformAccel accel;
  double u_theta = 0.0; // commanded effect after drift cancellation
  HeadingAffineModel model;
  double theta_ddot_cmd = 0.0;
};

// Probe, cancel the drift, allocate.
ControllerOutput controller_step(const EngineConfig& cfg, const Vec& q, const Vec& qd,
                                 double t, const HeadingRefSample& ref,
                                 const TrackingGains& gains);
ControllerOutput controller_step(const PinnedSolve& solve, double theta,
                                 double theta_rate, const HeadingRefSample& ref,
                                 const TrackingGains& gains);

enum class WaypointMode { heading_tol, position_tol };

struct WaypointSettings {
  WaypointMode mode = WaypointMode::position_tol;
  double position_radius = 1.0; // m
  double heading_tol = 0.05;    // rad
  double min_dwell = 1.0;       // s, guard against chattering in heading mode
  double filter_tau = 0.1;      // s, low-pass differentiator time constant
};

// Turns an ordered list of platform-frame target points into a heading
// reference: the desired angle is the bearing from the robot to the active
// target, unwrapped; its derivatives come from a first-order low-pass
// differentiator whose two states (z, w) integrate alongside the plant.
// After the last target the supervisor holds the final heading.
class WaypointSupervisor {
 public:
  WaypointSupervisor(std::vector<Eigen::Vector2d> targets, WaypointSettings settings);

  int active_target() const { return active_; }
  bool done() const { return active_ >= static_cast<int>(targets_.size()); }
  const std::vector<double>& switch_times() const { return switch_times_; }
  const WaypointSettings& settings() const { return settings_; }

  // Consistent filter initialization: z at the initial bearing, w at zero.
  Eigen::Vector2d initial_filter_state(double x, double y) const;

  HeadingRefSample reference(double x, double y, double z, double w) const;
  Eigen::Vector2d filter_rates(double x, double y, double z, double w) const;

  // Advancement check, called after each accepted integration step.
  void observe(double t, double x, double y, double theta, double z);

 private:
  double bearing(double x, double y, double near) const;

  std::vector<Eigen::Vector2d> targets_;
  WaypointSettings settings_;
  int active_ = 0;
  double last_switch_time_ = 0.0;
  double hold_heading_ = 0.0;
  std::vector<double> switch_times_;
};

} // namespace loco
