#include "loco/model.hpp"

#include <sstream>

namespace loco {

GaitSample gait_eval(const GaitSignal& g, double t) {
  const double c = std::cos(g.angular_frequency * t + g.phase);
  const double s = std::sin(g.angular_frequency * t + g.phase);
  const double w = g.angular_frequency;
  return {g.bias + g.amplitude * c, -g.amplitude * w * s, -g.amplitude * w * w * c};
}

namespace {

void require_positive(double value, const std::string& field) {
  if (!(value > 0.0)) {
    std::ostringstream msg;
    msg << field << " must be positive (got " << value << ")";
    throw ValidationError(msg.str());
  }
}

void validate_link(const LinkParams& link, const std::string& prefix) {
  require_positive(link.mass, prefix + ".mass");
  require_positive(link.length, prefix + ".length");
  require_positive(link.inertia, prefix + ".inertia");
}

} // namespace

void validate_robot(const RobotParams& robot, const std::string& prefix) {
  validate_link(robot.head, prefix + "head");
  validate_link(robot.tail, prefix + "tail");
  if (robot.spring_stiffness < 0.0) {
    std::ostringstream msg;
    msg << prefix << "spring_stiffness must be nonnegative (got "
        << robot.spring_stiffness << ")";
    throw ValidationError(msg.str());
  }
}

void validate_params(const RobotParams& robot, const PlatformParams& platform) {
  validate_robot(robot);
  if (platform.mode == PlatformMode::free_floating) {
    require_positive(platform.mass, "platform.mass");
  }
}

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

} // namespace loco
