#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "loco/integrate.hpp"
#include "loco/school.hpp"

using namespace loco;

namespace {

RobotParams fig3_robot() {
  RobotParams par;
  par.head = {2.0, 2.0, 2.0};
  par.tail = {1.0, 1.0, 0.25};
  return par;
}

SchoolSpec two_robot_spec() {
  SchoolSpec spec;
  SchoolRobot r1;
  r1.params = fig3_robot();
  r1.gait = GaitSignal{M_PI / 4.0, 1.0, 0.0, 0.0};
  r1.y0 = 2.0;
  SchoolRobot r2 = r1;
  r2.y0 = -2.0;
  spec.robots = {r1, r2};
  spec.platform_mass = 1.0;
  return spec;
}

// Integrates a school on a fixed output grid so runs with different initial
// placements can be compared sample by sample.
IntegrationResult run_school(const SchoolSpec& spec, double horizon) {
  EngineConfig cfg = build_school(spec);
  FullState s0 = school_initial_state(spec);
  const int nq = cfg.coord_count();
  RateFn f = [&cfg, nq](double t, const StateVec& s) {
    FullState st;
    st.q = s.head(nq);
    st.qd = s.tail(nq);
    return StateVec(coupled_rates(cfg, st, t));
  };
  StateVec s0v(2 * nq);
  s0v << s0.q, s0.qd;
  StepHook project = [&cfg, nq](double, StateVec& s) {
    s.tail(nq) = project_velocities(cfg, Vec(s.head(nq)), Vec(s.tail(nq)));
    return true;
  };
  IntegratorSpec spec_i;
  std::vector<double> grid;
  for (double t = 0.0; t <= horizon + 1e-12; t += 0.05) grid.push_back(t);
  return integrate(f, s0v, 0.0, horizon, spec_i, &project, &grid);
}

} // namespace

TEST_CASE("zero-phase school starts exactly at rest") {
  SchoolSpec spec = two_robot_spec();
  EngineConfig cfg = build_school(spec);
  FullState s = school_initial_state(spec);
  CHECK(s.qd.norm() == 0.0);
  CHECK(system_momentum(cfg, s.q, s.qd).norm() == 0.0);
  CHECK(constraint_residual(cfg, s.q, s.qd) == 0.0);
  CHECK(s.q[0] == doctest::Approx(M_PI / 4.0));
  CHECK(s.q[2] == 2.0);
  CHECK(s.q[6] == -2.0);
}

TEST_CASE("quarter-phase gait rates need the velocity projection") {
  SchoolSpec spec = two_robot_spec();
  spec.robots[0].gait.phase = M_PI / 2.0; // joint moving at t = 0
  EngineConfig cfg = build_school(spec);
  FullState s = school_initial_state(spec);
  CHECK(constraint_residual(cfg, s.q, s.qd) > 1e-3);
  Vec fixed = project_velocities(cfg, s.q, s.qd);
  CHECK(constraint_residual(cfg, s.q, fixed) < 1e-12);
  CHECK(fixed[0] == doctest::Approx(s.qd[0]).epsilon(1e-14)); // gait rate kept
}

TEST_CASE("body-frame platform velocity components") {
  BodyFrameVelocity v = platform_frame_velocities(0.0, 1.3, -0.4);
  CHECK(v.f == doctest::Approx(1.3));
  CHECK(v.g == doctest::Approx(-0.4));
  v = platform_frame_velocities(M_PI / 2.0, 1.3, -0.4);
  CHECK(v.f == doctest::Approx(-0.4));
  CHECK(v.g == doctest::Approx(-1.3));

  std::mt19937 rng(19);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI), val(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double dX = val(rng), dY = val(rng);
    v = platform_frame_velocities(ang(rng), dX, dY);
    CHECK(v.f * v.f + v.g * v.g == doctest::Approx(dX * dX + dY * dY).epsilon(1e-13));
  }
}

TEST_CASE("coupled rates stack velocities over constrained accelerations") {
  SchoolSpec spec = two_robot_spec();
  EngineConfig cfg = build_school(spec);
  FullState s = school_initial_state(spec);
  Vec r = coupled_rates(cfg, s, 0.0);
  REQUIRE(r.size() == 2 * cfg.coord_count());
  CHECK((r.head(cfg.coord_count()) - s.qd).norm() == 0.0);
  Vec qdd = r.tail(cfg.coord_count());
  Mat A = constraint_matrix(cfg, s.q);
  Vec resid = A * qdd + constraint_rate_product(cfg, s.q, s.qd);
  CHECK(resid.lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("translating the school translates the trajectory") {
  SchoolSpec base = two_robot_spec();
  SchoolSpec moved = base;
  const double cx = 1.7, cy = -0.9;
  for (SchoolRobot& r : moved.robots) {
    r.x0 += cx;
    r.y0 += cy;
  }
  IntegrationResult a = run_school(base, 3.0);
  IntegrationResult b = run_school(moved, 3.0);
  REQUIRE(a.s.size() == b.s.size());
  for (std::size_t k = 0; k < a.s.size(); k += 7) {
    for (int i = 0; i < 2; ++i) {
      CHECK(b.s[k][4 * i + 1] == doctest::Approx(a.s[k][4 * i + 1] + cx).epsilon(1e-9));
      CHECK(b.s[k][4 * i + 2] == doctest::Approx(a.s[k][4 * i + 2] + cy).epsilon(1e-9));
      CHECK(b.s[k][4 * i + 3] == doctest::Approx(a.s[k][4 * i + 3]).epsilon(1e-9));
    }
    // The inertial platform path is unaffected by where the robots sit on it.
    CHECK(b.s[k][8] == doctest::Approx(a.s[k][8]).epsilon(1e-9));
    CHECK(b.s[k][9] == doctest::Approx(a.s[k][9]).epsilon(1e-9));
  }
}

TEST_CASE("rotating the school rotates the trajectory") {
  SchoolSpec base = two_robot_spec();
  SchoolSpec turned = base;
  const double phi = 0.8;
  const double c = std::cos(phi), s = std::sin(phi);
  for (SchoolRobot& r : turned.robots) {
    const double x = r.x0, y = r.y0;
    r.x0 = c * x - s * y;
    r.y0 = s * x + c * y;
    r.theta0 += phi;
  }
  IntegrationResult a = run_school(base, 3.0);
  IntegrationResult b = run_school(turned, 3.0);
  REQUIRE(a.s.size() == b.s.size());
  for (std::size_t k = 0; k < a.s.size(); k += 7) {
    for (int i = 0; i < 2; ++i) {
      const double xa = a.s[k][4 * i + 1], ya = a.s[k][4 * i + 2];
      CHECK(b.s[k][4 * i + 1] == doctest::Approx(c * xa - s * ya).epsilon(1e-8));
      CHECK(b.s[k][4 * i + 2] == doctest::Approx(s * xa + c * ya).epsilon(1e-8));
      CHECK(b.s[k][4 * i + 3] == doctest::Approx(a.s[k][4 * i + 3] + phi).epsilon(1e-8));
    }
    const double Xa = a.s[k][8], Ya = a.s[k][9];
    CHECK(b.s[k][8] == doctest::Approx(c * Xa - s * Ya).epsilon(1e-8));
    CHECK(b.s[k][9] == doctest::Approx(s * Xa + c * Ya).epsilon(1e-8));
  }
}

TEST_CASE("mirroring the school across the x axis mirrors the trajectory") {
  SchoolSpec base = two_robot_spec();
  base.robots[0].gait.bias = 0.2; // break the y symmetry of the school itself
  SchoolSpec mirrored = base;
  for (SchoolRobot& r : mirrored.robots) {
    r.y0 = -r.y0;
    r.theta0 = -r.theta0;
    r.gait.amplitude = -r.gait.amplitude;
    r.gait.bias = -r.gait.bias;
  }
  IntegrationResult a = run_school(base, 3.0);
  IntegrationResult b = run_school(mirrored, 3.0);
  REQUIRE(a.s.size() == b.s.size());
  for (std::size_t k = 0; k < a.s.size(); k += 7) {
    for (int i = 0; i < 2; ++i) {
      CHECK(b.s[k][4 * i + 0] == doctest::Approx(-a.s[k][4 * i + 0]).epsilon(1e-9));
      CHECK(b.s[k][4 * i + 1] == doctest::Approx(a.s[k][4 * i + 1]).epsilon(1e-9));
      CHECK(b.s[k][4 * i + 2] == doctest::Approx(-a.s[k][4 * i + 2]).epsilon(1e-9));
      CHECK(b.s[k][4 * i + 3] == doctest::Approx(-a.s[k][4 * i + 3]).epsilon(1e-9));
    }
    CHECK(b.s[k][8] == doctest::Approx(a.s[k][8]).epsilon(1e-9));
    CHECK(b.s[k][9] == doctest::Approx(-a.s[k][9]).epsilon(1e-9));
  }
}

TEST_CASE("a very heavy platform decouples the robots") {
  // Each robot on a near-immovable platform should move like a single robot
  // on fixed ground.
  SchoolSpec spec = two_robot_spec();
  spec.platform_mass = 1e9;
  IntegrationResult school = run_school(spec, 4.0);

  EngineConfig solo_cfg({RobotSlot{fig3_robot(), spec.robots[0].gait}}, PlatformParams{});
  FullState s0;
  s0.q = Vec::Zero(4);
  s0.qd = Vec::Zero(4);
  s0.q[0] = gait_eval(spec.robots[0].gait, 0.0).angle;
  s0.q[2] = 2.0;
  RateFn f = [&solo_cfg](double t, const StateVec& s) {
    Vec rate(8);
    rate.head(4) = s.tail(4);
    rate.tail(4) = constrained_accel(solo_cfg, Vec(s.head(4)), Vec(s.tail(4)), t).accel;
    return StateVec(rate);
  };
  StateVec v0(8);
  v0 << s0.q, s0.qd;
  IntegrationResult solo = integrate(f, v0, 0.0, 4.0, IntegratorSpec{});

  const StateVec& endschool = school.s.back();
  const StateVec& endsolo = solo.s.back();
  for (int j = 0; j < 4; ++j) {
    CHECK(endschool[j] == doctest::Approx(endsolo[j]).epsilon(2e-6));
  }
  // The platform itself barely moves.
  CHECK(std::abs(endschool[8]) < 1e-6);
  CHECK(std::abs(endschool[9]) < 1e-6);
}

TEST_CASE("displacement report reads platform-relative robot positions") {
  Trajectory traj;
  traj.robot_count = 1;
  traj.has_platform_coords = true;
  for (int k = 0; k <= 4; ++k) {
    TrajectorySample s;
    s.t = 0.1 * k;
    s.q = Vec::Zero(6);
    s.qd = Vec::Zero(6);
    s.q[1] = 0.5 * k;
    s.q[2] = k % 2 == 0 ? 0.0 : 0.3;
    traj.samples.push_back(s);
  }
  DisplacementReport rep = displacement_report(traj, 0);
  REQUIRE(rep.path.size() == 5);
  CHECK(rep.net_vector[0] == doctest::Approx(2.0));
  CHECK(rep.net_vector[1] == doctest::Approx(0.0));
  CHECK(rep.net_displacement == doctest::Approx(2.0));
}

TEST_CASE("chord deviation measures stride-sampled straightness") {
  std::vector<Eigen::Vector2d> line = {{0.0, 0.0}, {1.0, 0.5}, {2.0, 1.0}, {3.0, 1.5}};
  CHECK(chord_deviation_fraction(line, 1) == doctest::Approx(0.0));

  std::vector<Eigen::Vector2d> bump = {{0.0, 0.0}, {1.0, 0.3}, {2.0, 0.0}};
  CHECK(chord_deviation_fraction(bump, 1) == doctest::Approx(0.15));
  // A stride of two skips the bump entirely: only endpoints are sampled.
  CHECK(chord_deviation_fraction(bump, 2) == doctest::Approx(0.0));
}
