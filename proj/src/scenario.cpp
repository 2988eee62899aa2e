#include "loco/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "loco/reduced.hpp"
#include "loco/school.hpp"

namespace loco {

using nlohmann::json;

std::string topology_name(Topology t) {
  switch (t) {
    case Topology::stationary: return "stationary";
    case Topology::school: return "school";
    case Topology::controlled_platform: return "controlled_platform";
  }
  return "stationary";
}

Topology topology_from_name(const std::string& name) {
  if (name == "stationary") return Topology::stationary;
  if (name == "school") return Topology::school;
  if (name == "controlled_platform") return Topology::controlled_platform;
  throw ValidationError("unknown topology '" + name +
                        "' (expected stationary, school, or controlled_platform)");
}

HeadingRefSample HeadingRefSpec::sample(double t) const {
  switch (kind) {
    case Kind::ramp:
      return {theta_offset + rate * t, rate, 0.0};
    case Kind::sine:
      return {theta_offset + amplitude * std::sin(omega * t),
              amplitude * omega * std::cos(omega * t),
              -amplitude * omega * omega * std::sin(omega * t)};
    case Kind::waypoints:
      break;
  }
  throw ValidationError("waypoint references are sampled through the supervisor");
}

EngineConfig Scenario::engine_config() const {
  std::vector<RobotSlot> slots;
  slots.reserve(robots.size());
  for (const RobotSetup& r : robots) slots.push_back({r.params, r.gait});
  PlatformParams plat;
  plat.mass = platform_mass;
  switch (topology) {
    case Topology::stationary: plat.mode = PlatformMode::stationary; break;
    case Topology::school: plat.mode = PlatformMode::free_floating; break;
    case Topology::controlled_platform: plat.mode = PlatformMode::accelerated; break;
  }
  return EngineConfig(std::move(slots), plat);
}

FullState Scenario::initial_state() const {
  const EngineConfig cfg = engine_config();
  Vec q = Vec::Zero(cfg.coord_count());
  Vec qd = Vec::Zero(cfg.coord_count());
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const RobotSetup& r = robots[i];
    const int b = 4 * static_cast<int>(i);
    double alpha = r.alpha0;
    double rate = 0.0;
    if (r.gait) {
      const GaitSample g0 = gait_eval(*r.gait, 0.0);
      alpha = g0.angle;
      rate = g0.rate;
    }
    q[b] = alpha;
    q[b + 1] = r.x0;
    q[b + 2] = r.y0;
    q[b + 3] = r.theta0;
    qd[b] = rate;
    if (r.rolling_start) {
      if (r.gait) throw ValidationError("rolling_start applies to passive joints only");
      const double sa = std::sin(alpha);
      if (std::abs(sa) < 1e-9) {
        throw ValidationError("rolling_start is undefined at sin(alpha0) = 0");
      }
      // Steady rolling: rates proportional to the roll direction, so both
      // wheel constraints hold exactly and the joint rate is zero.
      const double f =
          (r.params.head.length + r.params.tail.length * std::cos(alpha)) / (2.0 * sa);
      qd[b + 1] = r.theta_rate0 * f * std::cos(r.theta0);
      qd[b + 2] = r.theta_rate0 * f * std::sin(r.theta0);
      qd[b + 3] = r.theta_rate0;
    }
  }
  qd = project_velocities(cfg, q, qd);
  return {std::move(q), std::move(qd)};
}

void validate_scenario(const Scenario& sc) {
  if (sc.robots.empty()) throw ValidationError("scenario has no robots");
  sc.integrator.validate();
  if (!(sc.duration > 0.0)) throw ValidationError("duration must be positive");
  if (!(sc.output_dt > 0.0) || sc.output_dt > sc.duration) {
    throw ValidationError("output_dt must lie in (0, duration]");
  }
  switch (sc.topology) {
    case Topology::stationary:
      break;
    case Topology::school:
      for (std::size_t i = 0; i < sc.robots.size(); ++i) {
        if (!sc.robots[i].gait) {
          std::ostringstream msg;
          msg << "school robots are gait-driven; robots[" << i << "] has no gait";
          throw ValidationError(msg.str());
        }
      }
      break;
    case Topology::controlled_platform: {
      validate_gains(sc.gains);
      if (sc.robots[0].gait) {
        throw ValidationError("the steered robot must be passive (no gait on robots[0])");
      }
      const HeadingRefSpec& ref = sc.reference;
      if (ref.kind == HeadingRefSpec::Kind::waypoints) {
        if (ref.targets.empty()) throw ValidationError("waypoint reference has no targets");
        if (!(ref.waypoints.position_radius > 0.0)) {
          throw ValidationError("waypoints.position_radius must be positive");
        }
        if (!(ref.waypoints.heading_tol > 0.0)) {
          throw ValidationError("waypoints.heading_tol must be positive");
        }
        if (!(ref.waypoints.filter_tau > 0.0)) {
          throw ValidationError("waypoints.filter_tau must be positive");
        }
        if (ref.waypoints.min_dwell < 0.0) {
          throw ValidationError("waypoints.min_dwell must be nonnegative");
        }
        if (ref.settle_time < 0.0) throw ValidationError("settle_time must be nonnegative");
      }
      break;
    }
  }
  sc.engine_config(); // robot and platform parameter checks
}

namespace {

// Output times i * dt, then the exact end; the half-step margin keeps the
// final interval from degenerating when duration is a multiple of dt.
std::vector<double> output_grid(double duration, double dt) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(duration / dt) + 2);
  for (long i = 0; static_cast<double>(i) * dt < duration - 0.5 * dt; ++i) {
    grid.push_back(static_cast<double>(i) * dt);
  }
  grid.push_back(duration);
  return grid;
}

} // namespace

RunResult run_scenario(const Scenario& sc) {
  validate_scenario(sc);
  const EngineConfig cfg = sc.engine_config();
  const FullState init = sc.initial_state();
  const int nq = cfg.coord_count();
  const bool control = sc.topology == Topology::controlled_platform;
  const bool waypts = control && sc.reference.kind == HeadingRefSpec::Kind::waypoints;

  std::optional<WaypointSupervisor> sup;
  if (waypts) sup.emplace(sc.reference.targets, sc.reference.waypoints);

  // ODE state: [q; qd], plus the reference filter pair (z, w) on waypoint runs.
  const int ns = 2 * nq + (waypts ? 2 : 0);
  StateVec s0(ns);
  s0.head(nq) = init.q;
  s0.segment(nq, nq) = init.qd;
  if (waypts) s0.tail(2) = sup->initial_filter_state(init.q[1], init.q[2]);

  RunResult out;
  out.trajectory.robot_count = cfg.robot_count();
  out.trajectory.has_platform_coords = cfg.has_platform_coords();
  out.trajectory.has_control = control;

  auto reference_at = [&](double t, const StateVec& s) -> HeadingRefSample {
    if (!waypts) return sc.reference.sample(t);
    return sup->reference(s[1], s[2], s[2 * nq], s[2 * nq + 1]);
  };

  RateFn rates = [&](double t, const StateVec& s) -> StateVec {
    const Vec q = s.head(nq);
    const Vec qd = s.segment(nq, nq);
    StateVec ds(ns);
    ds.head(nq) = qd;
    const PinnedSolve solve(cfg, q, qd, t);
    if (control) {
      const HeadingRefSample ref = reference_at(t, s);
      const ControllerOutput u = controller_step(solve, q[3], qd[3], ref, sc.gains);
      ds.segment(nq, nq) = solve.accel(u.accel);
      if (waypts) ds.tail(2) = sup->filter_rates(s[1], s[2], s[2 * nq], s[2 * nq + 1]);
    } else {
      ds.segment(nq, nq) = solve.accel();
    }
    return ds;
  };

  double done_time = -1.0;
  StepHook hook = [&](double t, StateVec& s) -> bool {
    if (sc.integrator.projection) {
      s.segment(nq, nq) = project_velocities(cfg, s.head(nq), s.segment(nq, nq));
    }
    if (waypts) {
      sup->observe(t, s[1], s[2], s[3], s[2 * nq]);
      if (sup->done()) {
        if (done_time < 0.0) done_time = t;
        if (t >= done_time + sc.reference.settle_time) return false;
      }
    }
    return true;
  };

  GridObserver observer = [&](double t, const StateVec& s) {
    TrajectorySample smp;
    smp.t = t;
    smp.q = s.head(nq);
    smp.qd = s.segment(nq, nq);
    const EnergyBreakdown e = energy(cfg, smp.q, smp.qd);
    smp.e_kin = e.kinetic;
    smp.e_pot = e.potential;
    smp.momentum = system_momentum(cfg, smp.q, smp.qd);
    smp.c_res = constraint_residual(cfg, smp.q, smp.qd);
    if (control) {
      const HeadingRefSample ref = reference_at(t, s);
      const PinnedSolve solve(cfg, smp.q, smp.qd, t);
      const ControllerOutput u = controller_step(solve, smp.q[3], smp.qd[3], ref, sc.gains);
      smp.theta_d = ref.angle;
      smp.u_theta = u.u_theta;
      smp.c_x = u.model.gain_x;
      smp.c_y = u.model.gain_y;
    }
    out.trajectory.samples.push_back(std::move(smp));
  };

  const std::vector<double> grid = output_grid(sc.duration, sc.output_dt);
  const IntegrationResult res =
      integrate(rates, s0, 0.0, sc.duration, sc.integrator, &hook, &grid, &observer);
  out.steps_accepted = res.steps_accepted;
  out.steps_rejected = res.steps_rejected;
  out.stopped_early = res.stopped_early;
  if (sup) {
    out.targets_done = sup->done();
    out.switch_times = sup->switch_times();
  }
  return out;
}

CompareReport compare_reduced_engine(const RobotParams& params, const GaitSignal& gait,
                                     double horizon, double exclusion) {
  if (!(horizon > 0.0)) throw ValidationError("horizon must be positive");
  validate_robot(params);
  PlatformParams plat;
  plat.mode = PlatformMode::stationary;
  const EngineConfig cfg({RobotSlot{params, gait}}, plat);

  const GaitSample g0 = gait_eval(gait, 0.0);
  // Zero nonholonomic momentum at t = 0; the pose rates follow from it.
  const Eigen::Vector3d pose_rates =
      reconstruct_rates(g0.angle, 0.0, g0.rate, 0.0, params);
  StateVec se(8);
  se << g0.angle, 0.0, 0.0, 0.0, g0.rate, pose_rates[0], pose_rates[1], pose_rates[2];

  IntegratorSpec tight;
  tight.abs_tol = 1e-12;
  tight.rel_tol = 1e-12;
  const std::vector<double> grid = output_grid(horizon, 0.01);

  RateFn engine_rates = [&](double t, const StateVec& s) -> StateVec {
    StateVec ds(8);
    ds.head(4) = s.tail(4);
    ds.tail(4) = PinnedSolve(cfg, s.head(4), s.tail(4), t).accel();
    return ds;
  };
  StepHook hook = [&](double, StateVec& s) -> bool {
    s.tail(4) = project_velocities(cfg, s.head(4), s.tail(4));
    return true;
  };
  const IntegrationResult engine_run =
      integrate_adaptive(engine_rates, se, 0.0, horizon, tight, &hook, &grid, nullptr);

  // Reduced side in the u = p sin(alpha) chart, regular through sin(alpha) = 0.
  RateFn reduced_rates = [&](double t, const StateVec& s) -> StateVec {
    return regularized_vector_field(Vec4(s), gait, t, params);
  };
  const IntegrationResult reduced_run = integrate_adaptive(
      reduced_rates, StateVec::Zero(4), 0.0, horizon, tight, nullptr, &grid, nullptr);

  CompareReport rep;
  double sup_dp = 0.0;
  double sup_p = 0.0;
  const std::size_t n = std::min(engine_run.t.size(), reduced_run.t.size());
  for (std::size_t i = 0; i < n; ++i) {
    const StateVec& e = engine_run.s[i];
    const StateVec& r = reduced_run.s[i];
    const double alpha_ref = gait_eval(gait, engine_run.t[i]).angle;
    double gap = std::abs(e[0] - alpha_ref);
    gap = std::max(gap, std::abs(e[1] - r[1]));
    gap = std::max(gap, std::abs(e[2] - r[2]));
    gap = std::max(gap, std::abs(e[3] - r[3]));
    rep.max_pose_gap = std::max(rep.max_pose_gap, gap);
    ++rep.samples;

    const double sa = std::sin(alpha_ref);
    if (std::abs(sa) > exclusion) {
      const Vec4 body_rates(e[4], e[5], e[6], e[7]);
      const double p_engine = nonholonomic_momentum(e[0], e[3], body_rates, params);
      const double p_reduced = r[0] / sa;
      sup_dp = std::max(sup_dp, std::abs(p_engine - p_reduced));
      sup_p = std::max(sup_p, std::abs(p_reduced));
      ++rep.momentum_samples;
    }
  }
  // Relative against the peak momentum scale; pointwise ratios are
  // meaningless where p crosses zero.
  rep.max_momentum_rel = sup_p > 0.0 ? sup_dp / sup_p : sup_dp;
  return rep;
}

namespace {

RobotParams fig3_robot() {
  RobotParams par;
  par.head = {2.0, 2.0, 2.0};
  par.tail = {1.0, 1.0, 0.25};
  return par;
}

// Heavier-inertia variant whose straight-rolling zero dynamics are tame
// enough for heading control to hold a cruise.
RobotParams steering_robot() {
  RobotParams par;
  par.head = {2.0, 2.0, 6.0};
  par.tail = {1.0, 1.0, 0.75};
  return par;
}

Scenario school_scenario(const std::string& name, double platform_mass,
                         double gait2_phase, double theta2) {
  Scenario sc;
  sc.name = name;
  sc.topology = Topology::school;
  sc.platform_mass = platform_mass;
  sc.duration = 16.0 * M_PI; // eight gait cycles at angular frequency 1
  sc.output_dt = 0.02;
  RobotSetup r1;
  r1.params = fig3_robot();
  r1.gait = GaitSignal{M_PI / 4.0, 1.0, 0.0, 0.0};
  r1.y0 = 2.0;
  RobotSetup r2 = r1;
  r2.gait = GaitSignal{M_PI / 4.0, 1.0, gait2_phase, 0.0};
  r2.y0 = -2.0;
  r2.theta0 = theta2;
  sc.robots = {r1, r2};
  return sc;
}

Scenario controlled_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  sc.topology = Topology::controlled_platform;
  RobotSetup r;
  r.params = steering_robot();
  r.rolling_start = true;
  sc.robots = {r};
  sc.output_dt = 0.01;
  return sc;
}

Scenario make_builtin(const std::string& name) {
  if (name == "fig3_school") {
    Scenario sc = school_scenario(name, 1.0, 0.0, 0.0);
    sc.summary = "two synchronized robots advance from rest on a light free platform;"
                 " total momentum stays zero and the platform recoils";
    // Finer grid than the fig4 variants: momentum conservation is audited to
    // 1e-9 here and the grid-clipped steps set the truncation error.
    sc.output_dt = 0.01;
    return sc;
  }
  if (name == "fig4_sync") {
    Scenario sc = school_scenario(name, 20.0, 0.0, 0.0);
    sc.summary = "school variant: both robots synchronized and parallel";
    return sc;
  }
  if (name == "fig4_mirror") {
    Scenario sc = school_scenario(name, 20.0, M_PI, 0.0);
    sc.summary = "school variant: second robot gait a half-cycle out of phase";
    return sc;
  }
  if (name == "fig4_plus90") {
    Scenario sc = school_scenario(name, 20.0, 0.0, M_PI / 2.0);
    sc.summary = "school variant: second robot headed +90 degrees";
    return sc;
  }
  if (name == "fig4_minus90") {
    Scenario sc = school_scenario(name, 20.0, 0.0, -M_PI / 2.0);
    sc.summary = "school variant: second robot headed -90 degrees";
    return sc;
  }
  if (name == "fig5_spring") {
    Scenario sc;
    sc.name = name;
    sc.summary = "sprung passive joint released from rest on fixed ground; spring"
                 " energy converts to translational kinetic energy";
    sc.topology = Topology::stationary;
    RobotSetup r;
    r.params = fig3_robot();
    r.params.spring_stiffness = 1.0;
    r.alpha0 = M_PI / 3.0;
    sc.robots = {r};
    sc.duration = 100.0;
    sc.output_dt = 0.02;
    return sc;
  }
  if (name == "fig6_circle") {
    Scenario sc = controlled_scenario(name);
    sc.summary = "platform acceleration steers the passive robot onto a steady"
                 " turn tracking theta_d(t) = t";
    sc.robots[0].alpha0 = 0.9;
    sc.robots[0].theta0 = -0.2;
    sc.robots[0].theta_rate0 = 1.0;
    sc.gains = {2.0, 1.0, 1e-6};
    sc.reference.kind = HeadingRefSpec::Kind::ramp;
    sc.reference.rate = 1.0;
    sc.duration = 50.0;
    return sc;
  }
  if (name == "fig7_snake") {
    Scenario sc = controlled_scenario(name);
    sc.summary = "heading tracks a sinusoidal reference, weaving about a straight"
                 " course";
    sc.robots[0].alpha0 = 0.2;
    sc.robots[0].theta_rate0 = M_PI / 12.0; // reference rate at t = 0
    sc.gains = {2.0, 1.0, 1e-2};
    sc.reference.kind = HeadingRefSpec::Kind::sine;
    sc.reference.amplitude = M_PI / 6.0;
    sc.reference.omega = 0.5;
    sc.duration = 40.0;
    return sc;
  }
  if (name == "fig8_waypoints") {
    Scenario sc = controlled_scenario(name);
    sc.summary = "waypoint supervisor steers the robot through three targets;"
                 " each switch provokes a platform excursion";
    sc.robots[0].alpha0 = 0.2;
    sc.robots[0].theta0 = std::atan2(-15.0, -15.0); // face the first target
    // Gentle cruise on the initial rolling orbit. Faster approaches overshoot
    // the radius-1 target balls once the joint drifts toward a flat fold.
    const double cruise = 0.3;
    sc.robots[0].theta_rate0 =
        cruise * 2.0 * std::sin(0.2) / (2.0 + std::cos(0.2));
    sc.gains = {2.0, 1.0, 1e-3};
    sc.reference.kind = HeadingRefSpec::Kind::waypoints;
    sc.reference.targets = {{-15.0, -15.0}, {-15.0, -30.0}, {0.0, -60.0}};
    sc.duration = 260.0;
    sc.output_dt = 0.02;
    return sc;
  }
  std::ostringstream msg;
  msg << "unknown scenario '" << name << "'; available:";
  for (const std::string& n : builtin_scenario_names()) msg << ' ' << n;
  throw ValidationError(msg.str());
}

} // namespace

std::vector<std::string> builtin_scenario_names() {
  return {"fig3_school", "fig4_sync",   "fig4_mirror", "fig4_plus90", "fig4_minus90",
          "fig5_spring", "fig6_circle", "fig7_snake",  "fig8_waypoints"};
}

Scenario builtin_scenario(const std::string& name) { return make_builtin(name); }

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) throw ValidationError("unknown key '" + item.key() + "' in " + context);
  }
}

json link_to_json(const LinkParams& l) {
  return {{"mass", l.mass}, {"length", l.length}, {"inertia", l.inertia}};
}

LinkParams link_from_json(const json& j, const std::string& context) {
  check_keys(j, {"mass", "length", "inertia"}, context);
  LinkParams l;
  l.mass = j.value("mass", l.mass);
  l.length = j.value("length", l.length);
  l.inertia = j.value("inertia", l.inertia);
  return l;
}

json robot_to_json(const RobotSetup& r) {
  json jr = {{"head", link_to_json(r.params.head)},
             {"tail", link_to_json(r.params.tail)},
             {"spring_stiffness", r.params.spring_stiffness},
             {"x0", r.x0},
             {"y0", r.y0},
             {"theta0", r.theta0},
             {"alpha0", r.alpha0},
             {"rolling_start", r.rolling_start},
             {"theta_rate0", r.theta_rate0}};
  if (r.gait) {
    jr["gait"] = {{"amplitude", r.gait->amplitude},
                  {"angular_frequency", r.gait->angular_frequency},
                  {"phase", r.gait->phase},
                  {"bias", r.gait->bias}};
  } else {
    jr["gait"] = nullptr;
  }
  return jr;
}

RobotSetup robot_from_json(const json& j, const std::string& context) {
  check_keys(j,
             {"head", "tail", "spring_stiffness", "gait", "x0", "y0", "theta0", "alpha0",
              "rolling_start", "theta_rate0"},
             context);
  RobotSetup r;
  if (j.contains("head")) r.params.head = link_from_json(j["head"], context + ".head");
  if (j.contains("tail")) r.params.tail = link_from_json(j["tail"], context + ".tail");
  r.params.spring_stiffness = j.value("spring_stiffness", r.params.spring_stiffness);
  if (j.contains("gait") && !j["gait"].is_null()) {
    const json& jg = j["gait"];
    check_keys(jg, {"amplitude", "angular_frequency", "phase", "bias"}, context + ".gait");
    GaitSignal g;
    g.amplitude = jg.value("amplitude", g.amplitude);
    g.angular_frequency = jg.value("angular_frequency", g.angular_frequency);
    g.phase = jg.value("phase", g.phase);
    g.bias = jg.value("bias", g.bias);
    r.gait = g;
  }
  r.x0 = j.value("x0", r.x0);
  r.y0 = j.value("y0", r.y0);
  r.theta0 = j.value("theta0", r.theta0);
  r.alpha0 = j.value("alpha0", r.alpha0);
  r.rolling_start = j.value("rolling_start", r.rolling_start);
  r.theta_rate0 = j.value("theta_rate0", r.theta_rate0);
  return r;
}

json scenario_to_json_tree(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["summary"] = sc.summary;
  j["topology"] = topology_name(sc.topology);
  j["platform_mass"] = sc.platform_mass;
  j["duration"] = sc.duration;
  j["output_dt"] = sc.output_dt;
  j["integrator"] = {
      {"method", sc.integrator.method == IntegratorSpec::Method::rk4_fixed ? "rk4_fixed"
                                                                           : "rk45_adaptive"},
      {"step", sc.integrator.step},
      {"abs_tol", sc.integrator.abs_tol},
      {"rel_tol", sc.integrator.rel_tol},
      {"projection", sc.integrator.projection}};
  j["gains"] = {{"d1", sc.gains.d1}, {"d2", sc.gains.d2}, {"epsilon", sc.gains.epsilon}};

  const HeadingRefSpec& ref = sc.reference;
  json jt = json::array();
  for (const Eigen::Vector2d& p : ref.targets) jt.push_back({p[0], p[1]});
  const char* kind = ref.kind == HeadingRefSpec::Kind::ramp    ? "ramp"
                     : ref.kind == HeadingRefSpec::Kind::sine  ? "sine"
                                                               : "waypoints";
  j["reference"] = {
      {"kind", kind},
      {"rate", ref.rate},
      {"theta_offset", ref.theta_offset},
      {"amplitude", ref.amplitude},
      {"omega", ref.omega},
      {"targets", jt},
      {"waypoints",
       {{"mode",
         ref.waypoints.mode == WaypointMode::heading_tol ? "heading_tol" : "position_tol"},
        {"position_radius", ref.waypoints.position_radius},
        {"heading_tol", ref.waypoints.heading_tol},
        {"min_dwell", ref.waypoints.min_dwell},
        {"filter_tau", ref.waypoints.filter_tau}}},
      {"settle_time", ref.settle_time}};

  json jr = json::array();
  for (const RobotSetup& r : sc.robots) jr.push_back(robot_to_json(r));
  j["robots"] = jr;
  return j;
}

Scenario scenario_from_json_tree(const json& j) {
  if (!j.is_object()) throw ValidationError("scenario document must be a JSON object");
  check_keys(j,
             {"name", "summary", "topology", "platform_mass", "duration", "output_dt",
              "integrator", "gains", "reference", "robots"},
             "scenario");
  Scenario sc;
  sc.name = j.value("name", sc.name);
  sc.summary = j.value("summary", sc.summary);
  if (j.contains("topology")) sc.topology = topology_from_name(j["topology"]);
  sc.platform_mass = j.value("platform_mass", sc.platform_mass);
  sc.duration = j.value("duration", sc.duration);
  sc.output_dt = j.value("output_dt", sc.output_dt);

  if (j.contains("integrator")) {
    const json& ji = j["integrator"];
    check_keys(ji, {"method", "step", "abs_tol", "rel_tol", "projection"}, "integrator");
    if (ji.contains("method")) {
      const std::string m = ji["method"];
      if (m == "rk4_fixed") {
        sc.integrator.method = IntegratorSpec::Method::rk4_fixed;
      } else if (m == "rk45_adaptive") {
        sc.integrator.method = IntegratorSpec::Method::rk45_adaptive;
      } else {
        throw ValidationError("unknown integrator method '" + m +
                              "' (expected rk4_fixed or rk45_adaptive)");
      }
    }
    sc.integrator.step = ji.value("step", sc.integrator.step);
    sc.integrator.abs_tol = ji.value("abs_tol", sc.integrator.abs_tol);
    sc.integrator.rel_tol = ji.value("rel_tol", sc.integrator.rel_tol);
    sc.integrator.projection = ji.value("projection", sc.integrator.projection);
  }
  if (j.contains("gains")) {
    const json& jg = j["gains"];
    check_keys(jg, {"d1", "d2", "epsilon"}, "gains");
    sc.gains.d1 = jg.value("d1", sc.gains.d1);
    sc.gains.d2 = jg.value("d2", sc.gains.d2);
    sc.gains.epsilon = jg.value("epsilon", sc.gains.epsilon);
  }
  if (j.contains("reference")) {
    const json& jf = j["reference"];
    check_keys(jf,
               {"kind", "rate", "theta_offset", "amplitude", "omega", "targets",
                "waypoints", "settle_time"},
               "reference");
    HeadingRefSpec& ref = sc.reference;
    if (jf.contains("kind")) {
      const std::string k = jf["kind"];
      if (k == "ramp") {
        ref.kind = HeadingRefSpec::Kind::ramp;
      } else if (k == "sine") {
        ref.kind = HeadingRefSpec::Kind::sine;
      } else if (k == "waypoints") {
        ref.kind = HeadingRefSpec::Kind::waypoints;
      } else {
        throw ValidationError("unknown reference kind '" + k +
                              "' (expected ramp, sine, or waypoints)");
      }
    }
    ref.rate = jf.value("rate", ref.rate);
    ref.theta_offset = jf.value("theta_offset", ref.theta_offset);
    ref.amplitude = jf.value("amplitude", ref.amplitude);
    ref.omega = jf.value("omega", ref.omega);
    if (jf.contains("targets")) {
      ref.targets.clear();
      for (const json& p : jf["targets"]) {
        if (!p.is_array() || p.size() != 2) {
          throw ValidationError("reference.targets entries must be [x, y] pairs");
        }
        ref.targets.emplace_back(p[0].get<double>(), p[1].get<double>());
      }
    }
    if (jf.contains("waypoints")) {
      const json& jw = jf["waypoints"];
      check_keys(jw, {"mode", "position_radius", "heading_tol", "min_dwell", "filter_tau"},
                 "reference.waypoints");
      if (jw.contains("mode")) {
        const std::string m = jw["mode"];
        if (m == "position_tol") {
          ref.waypoints.mode = WaypointMode::position_tol;
        } else if (m == "heading_tol") {
          ref.waypoints.mode = WaypointMode::heading_tol;
        } else {
          throw ValidationError("unknown waypoint mode '" + m +
                                "' (expected position_tol or heading_tol)");
        }
      }
      ref.waypoints.position_radius = jw.value("position_radius", ref.waypoints.position_radius);
      ref.waypoints.heading_tol = jw.value("heading_tol", ref.waypoints.heading_tol);
      ref.waypoints.min_dwell = jw.value("min_dwell", ref.waypoints.min_dwell);
      ref.waypoints.filter_tau = jw.value("filter_tau", ref.waypoints.filter_tau);
    }
    ref.settle_time = jf.value("settle_time", ref.settle_time);
  }
  if (j.contains("robots")) {
    if (!j["robots"].is_array()) throw ValidationError("robots must be an array");
    sc.robots.clear();
    int i = 0;
    for (const json& jr : j["robots"]) {
      std::ostringstream ctx;
      ctx << "robots[" << i++ << "]";
      sc.robots.push_back(robot_from_json(jr, ctx.str()));
    }
  }
  return sc;
}

// Objects merge key-by-key; object arrays of matching length merge
// element-wise; everything else the override wins.
void deep_merge(json& base, const json& over) {
  if (base.is_object() && over.is_object()) {
    for (const auto& item : over.items()) {
      if (base.contains(item.key())) {
        deep_merge(base[item.key()], item.value());
      } else {
        base[item.key()] = item.value();
      }
    }
    return;
  }
  if (base.is_array() && over.is_array() && base.size() == over.size()) {
    for (std::size_t i = 0; i < base.size(); ++i) deep_merge(base[i], over[i]);
    return;
  }
  base = over;
}

json parse_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ValidationError("malformed JSON in scenario document");
  return j;
}

} // namespace

std::string scenario_to_json(const Scenario& sc) {
  return scenario_to_json_tree(sc).dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  return scenario_from_json_tree(parse_json(text));
}

Scenario apply_overlay(const Scenario& base, const std::string& overlay_text) {
  json tree = scenario_to_json_tree(base);
  deep_merge(tree, parse_json(overlay_text));
  return scenario_from_json_tree(tree);
}

namespace {

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

// 1-2-5 ladder value not exceeding the ratio, for the platform path blow-up.
double nice_scale(double ratio) {
  if (!(ratio > 1.0) || !std::isfinite(ratio)) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(ratio)));
  double best = mag;
  for (double m : {2.0, 5.0, 10.0}) {
    if (m * mag <= ratio) best = m * mag;
  }
  return best;
}

double path_extent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty()) return 0.0;
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  return std::max(*xmax - *xmin, *ymax - *ymin);
}

} // namespace

std::vector<PlotPanel> figure_panels(const Scenario& sc, const RunResult& result) {
  const Trajectory& tr = result.trajectory;
  const std::size_t n = tr.samples.size();
  std::vector<double> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = tr.samples[i].t;

  auto column = [&](auto&& get) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = get(tr.samples[i]);
    return v;
  };

  std::vector<PlotPanel> panels;

  PlotPanel paths;
  paths.title = sc.name + ": paths";
  paths.xlabel = "x [m]";
  paths.ylabel = "y [m]";
  paths.equal_aspect = true;
  for (int r = 0; r < tr.robot_count; ++r) {
    PlotSeries s;
    s.label = tr.robot_count > 1 ? "robot " + std::to_string(r + 1) : "robot";
    s.x = column([&](const TrajectorySample& smp) { return smp.q[4 * r + 1]; });
    s.y = column([&](const TrajectorySample& smp) { return smp.q[4 * r + 2]; });
    paths.series.push_back(std::move(s));
  }
  if (tr.has_platform_coords) {
    PlotSeries plat;
    plat.x = column([&](const TrajectorySample& smp) { return tr.platform_position(smp)[0]; });
    plat.y = column([&](const TrajectorySample& smp) { return tr.platform_position(smp)[1]; });
    const double robot_extent = path_extent(paths.series[0].x, paths.series[0].y);
    const double plat_extent = path_extent(plat.x, plat.y);
    double scale = 1.0;
    if (plat_extent > 0.0 && robot_extent > 0.0) {
      scale = nice_scale(robot_extent / plat_extent / 4.0);
    }
    if (scale != 1.0) {
      for (double& v : plat.x) v *= scale;
      for (double& v : plat.y) v *= scale;
      paths.notes.push_back("platform path scaled x" + fmt(scale));
    }
    plat.label = scale != 1.0 ? "platform (x" + fmt(scale) + ")" : "platform";
    plat.color = "#777777";
    paths.series.push_back(std::move(plat));
  }
  if (!sc.reference.targets.empty() &&
      sc.reference.kind == HeadingRefSpec::Kind::waypoints) {
    PlotSeries tgt;
    tgt.label = "targets";
    tgt.markers = true;
    tgt.color = "#000000";
    for (const Eigen::Vector2d& p : sc.reference.targets) {
      tgt.x.push_back(p[0]);
      tgt.y.push_back(p[1]);
    }
    paths.series.push_back(std::move(tgt));
  }

  if (sc.topology == Topology::controlled_platform) {
    PlotPanel heading;
    heading.title = sc.name + ": heading vs reference";
    heading.xlabel = "t [s]";
    heading.ylabel = "angle [rad]";
    PlotSeries th;
    th.label = "theta";
    th.x = ts;
    th.y = column([](const TrajectorySample& smp) { return smp.q[3]; });
    PlotSeries thd;
    thd.label = "theta_d";
    thd.x = ts;
    thd.y = column([](const TrajectorySample& smp) { return smp.theta_d; });
    double err = 0.0;
    for (std::size_t i = n / 2; i < n; ++i) err = std::max(err, std::abs(th.y[i] - thd.y[i]));
    heading.notes.push_back("max |theta - theta_d| over the final half: " + fmt(err));
    heading.series = {std::move(th), std::move(thd)};
    panels.push_back(std::move(heading));

    panels.push_back(std::move(paths));

    PlotPanel effort;
    effort.title = sc.name + ": commanded platform acceleration";
    effort.xlabel = "t [s]";
    effort.ylabel = "|u_p| [m/s^2]";
    PlotSeries up;
    up.x = ts;
    up.y = column([&](const TrajectorySample& smp) {
      const PlatformAccel a = allocate_platform_accel(
          smp.u_theta, {0.0, smp.c_x, smp.c_y}, sc.gains.epsilon);
      return std::hypot(a.ax, a.ay);
    });
    effort.series.push_back(std::move(up));
    if (!result.switch_times.empty()) {
      std::string note = "target arrivals at t =";
      for (double t : result.switch_times) note += " " + fmt(t);
      effort.notes.push_back(note);
    }
    panels.push_back(std::move(effort));
    return panels;
  }

  panels.push_back(std::move(paths));

  if (sc.topology == Topology::school) {
    PlotPanel mom;
    mom.title = sc.name + ": total momentum";
    mom.xlabel = "t [s]";
    mom.ylabel = "momentum [kg m/s]";
    PlotSeries px;
    px.label = "P_X";
    px.x = ts;
    px.y = column([](const TrajectorySample& smp) { return smp.momentum[0]; });
    PlotSeries py;
    py.label = "P_Y";
    py.x = ts;
    py.y = column([](const TrajectorySample& smp) { return smp.momentum[1]; });
    double pmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pmax = std::max(pmax, tr.samples[i].momentum.norm());
    }
    mom.notes.push_back("max |(P_X, P_Y)| = " + fmt(pmax));
    mom.series = {std::move(px), std::move(py)};
    panels.push_back(std::move(mom));
  } else {
    PlotPanel joint;
    joint.title = sc.name + ": joint angle";
    joint.xlabel = "t [s]";
    joint.ylabel = "alpha [rad]";
    PlotSeries al;
    al.x = ts;
    al.y = column([](const TrajectorySample& smp) { return smp.q[0]; });
    joint.series.push_back(std::move(al));
    panels.push_back(std::move(joint));

    PlotPanel en;
    en.title = sc.name + ": energy";
    en.xlabel = "t [s]";
    en.ylabel = "energy [J]";
    PlotSeries ek;
    ek.label = "kinetic";
    ek.x = ts;
    ek.y = column([](const TrajectorySample& smp) { return smp.e_kin; });
    PlotSeries ep;
    ep.label = "potential";
    ep.x = ts;
    ep.y = column([](const TrajectorySample& smp) { return smp.e_pot; });
    PlotSeries et;
    et.label = "total";
    et.x = ts;
    et.y = column([](const TrajectorySample& smp) { return smp.e_kin + smp.e_pot; });
    en.series = {std::move(ek), std::move(ep), std::move(et)};
    panels.push_back(std::move(en));
  }
  return panels;
}

} // namespace loco
