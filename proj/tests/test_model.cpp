#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "loco/model.hpp"

using namespace loco;

TEST_CASE("gait follows the cosine convention") {
  // alpha(t) = bias + A cos(w t + phi): a zero-phase gait starts at its
  // extremum, at rest, with acceleration -A w^2.
  GaitSignal g;
  g.amplitude = M_PI / 4.0;
  GaitSample s = gait_eval(g, 0.0);
  CHECK(s.angle == doctest::Approx(M_PI / 4.0).epsilon(1e-15));
  CHECK(s.rate == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s.accel == doctest::Approx(-M_PI / 4.0).epsilon(1e-15));

  // A quarter period later the same gait passes through its bias at peak rate.
  s = gait_eval(g, M_PI / 2.0);
  CHECK(s.angle == doctest::Approx(0.0));
  CHECK(s.rate == doctest::Approx(-M_PI / 4.0).epsilon(1e-15));
  CHECK(s.accel == doctest::Approx(0.0));
}

TEST_CASE("gait rate and accel are the time derivatives of the angle") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> amp(0.1, 1.5), freq(0.2, 3.0),
      ang(-M_PI, M_PI), time(0.0, 20.0);
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    GaitSignal g;
    g.amplitude = amp(rng);
    g.angular_frequency = freq(rng);
    g.phase = ang(rng);
    g.bias = 0.5 * ang(rng);
    const double t = time(rng);
    GaitSample c = gait_eval(g, t);
    GaitSample lo = gait_eval(g, t - h);
    GaitSample hi = gait_eval(g, t + h);
    CHECK(c.rate == doctest::Approx((hi.angle - lo.angle) / (2.0 * h)).epsilon(1e-6));
    CHECK(c.accel == doctest::Approx((hi.rate - lo.rate) / (2.0 * h)).epsilon(1e-6));
  }
}

TEST_CASE("zero-phase gaits start at rest") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> amp(0.0, 2.0), freq(0.1, 5.0);
  for (int i = 0; i < 50; ++i) {
    GaitSignal g;
    g.amplitude = amp(rng);
    g.angular_frequency = freq(rng);
    g.bias = amp(rng);
    CHECK(gait_eval(g, 0.0).rate == 0.0);
  }
}

TEST_CASE("wrap_angle lands in (-pi, pi] and preserves the angle mod 2 pi") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3.0 * M_PI / 2.0) == doctest::Approx(-M_PI / 2.0));
  CHECK(wrap_angle(2.0 * M_PI) == doctest::Approx(0.0));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> wide(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const double a = wide(rng);
    const double w = wrap_angle(a);
    CHECK(w > -M_PI);
    CHECK(w <= M_PI);
    const double k = (a - w) / (2.0 * M_PI);
    CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
  }
}

TEST_CASE("robot validation names the offending field") {
  RobotParams bad;
  bad.tail.length = -1.0;
  CHECK_THROWS_WITH_AS(validate_robot(bad, "robots[2]."),
                       doctest::Contains("robots[2].tail.length"), ValidationError);

  bad = RobotParams{};
  bad.head.mass = 0.0;
  CHECK_THROWS_WITH_AS(validate_robot(bad), doctest::Contains("head.mass"),
                       ValidationError);

  bad = RobotParams{};
  bad.spring_stiffness = -0.5;
  CHECK_THROWS_WITH_AS(validate_robot(bad), doctest::Contains("spring_stiffness"),
                       ValidationError);

  CHECK_NOTHROW(validate_robot(RobotParams{}));
}

TEST_CASE("platform mass matters only when the platform floats") {
  RobotParams robot;
  PlatformParams platform;
  platform.mass = 0.0;
  platform.mode = PlatformMode::stationary;
  CHECK_NOTHROW(validate_params(robot, platform));
  platform.mode = PlatformMode::free_floating;
  CHECK_THROWS_AS(validate_params(robot, platform), ValidationError);
  platform.mass = 2.0;
  CHECK_NOTHROW(validate_params(robot, platform));
}

TEST_CASE("symmetry predicate compares the two links") {
  RobotParams r;
  CHECK(r.is_symmetric());
  r.head.mass = 2.0;
  CHECK_FALSE(r.is_symmetric());
}
