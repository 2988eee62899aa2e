#pragma once
// Physical parameter and state records shared by every other module, plus the
// sinusoidal gait signal and parameter validation.

#include <cmath>
#include <stdexcept>
#include <string>

namespace loco {

// Bad parameters or malformed scenario configs. The CLI maps this to exit 1.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Runtime numerical trouble: degenerate constraint rows, chart singularities,
// step-size underflow. The CLI maps this to exit 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One rigid link. The wheel axle crosses the link at its midpoint, which is
// also the center of mass; inertia is taken about that point.
struct LinkParams {
  double mass = 1.0;     // kg
  double length = 1.0;   // m, full link length
  double inertia = 0.25; // kg m^2
};

struct RobotParams {
  LinkParams head;
  LinkParams tail;
  // Torsional spring at the joint, torque -spring_stiffness * alpha. Zero when
  // the joint is directly actuated (gait-driven).
  double spring_stiffness = 0.0; // N m / rad

  bool is_symmetric() const {
    return head.mass == tail.mass && head.length == tail.length &&
           head.inertia == tail.inertia;
  }
};

enum class PlatformMode { stationary, free_floating, accelerated };

struct PlatformParams {
  double mass = 1.0; // kg, meaningful only in free_floating mode
  PlatformMode mode = PlatformMode::stationary;
};

// alpha(t) = bias + amplitude * cos(angular_frequency * t + phase)
struct GaitSignal {
  double amplitude = 0.0;
  double angular_frequency = 1.0; // rad/s
  double phase = 0.0;
  double bias = 0.0;
};

struct GaitSample {
  double angle;
  double rate;
  double accel;
};

GaitSample gait_eval(const GaitSignal& g, double t);

// Reduced single-robot chart: joint angle, nonholonomic momentum, and the
// platform-relative pose of the tail wheel contact. The momentum coordinate
// degenerates where sin(alpha) = 0 (wheel axles parallel).
struct ReducedState {
  double alpha = 0.0;    // rad, head heading minus tail heading, in (-pi, pi]
  double momentum = 0.0; // kg m^2 / s
  double x = 0.0;        // m
  double y = 0.0;        // m
  double theta = 0.0;    // rad, tail heading, unwrapped
};

// Throws ValidationError naming the offending field ("tail.length", ...).
void validate_robot(const RobotParams& robot, const std::string& prefix = "");
void validate_params(const RobotParams& robot, const PlatformParams& platform);

// Wraps to (-pi, pi].
double wrap_angle(double a);

} // namespace loco
