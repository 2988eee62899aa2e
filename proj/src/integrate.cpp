#include "loco/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace loco {

void IntegratorSpec::validate() const {
  std::ostringstream msg;
  if (method == Method::rk4_fixed && !(step > 0.0)) {
    msg << "integrator.step must be positive (got " << step << ")";
    throw ValidationError(msg.str());
  }
  if (method == Method::rk45_adaptive && (!(abs_tol > 0.0) || !(rel_tol > 0.0))) {
    msg << "integrator tolerances must be positive (got abs " << abs_tol << ", rel "
        << rel_tol << ")";
    throw ValidationError(msg.str());
  }
}

StateVec rk4_step(const RateFn& f, const StateVec& s, double t, double h) {
  if (!(h > 0.0)) throw ValidationError("rk4_step needs h > 0");
  const StateVec k1 = f(t, s);
  const StateVec k2 = f(t + h / 2.0, s + h / 2.0 * k1);
  const StateVec k3 = f(t + h / 2.0, s + h / 2.0 * k2);
  const StateVec k4 = f(t + h, s + h * k3);
  return s + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

double error_norm(const StateVec& err, const StateVec& y0, const StateVec& y1,
                  double abs_tol, double rel_tol) {
  double acc = 0.0;
  for (int i = 0; i < err.size(); ++i) {
    const double sc = abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / err.size());
}

double initial_step(const RateFn& f, const StateVec& y0, double t0, double t1,
                    double abs_tol, double rel_tol, const StateVec& f0) {
  auto scaled_rms = [&](const StateVec& v) {
    double acc = 0.0;
    for (int i = 0; i < v.size(); ++i) {
      const double sc = abs_tol + rel_tol * std::abs(y0[i]);
      acc += (v[i] / sc) * (v[i] / sc);
    }
    return std::sqrt(acc / v.size());
  };
  const double d0 = scaled_rms(y0), d1 = scaled_rms(f0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, t1 - t0);
  const StateVec f1 = f(t0 + h0, y0 + h0 * f0);
  const double d2 = scaled_rms(f1 - f0) / h0;
  double h1;
  if (std::max(d1, d2) <= 1e-15) {
    h1 = std::max(1e-6, h0 * 1e-3);
  } else {
    h1 = std::pow(0.01 / std::max(d1, d2), 0.2);
  }
  return std::min({100.0 * h0, h1, t1 - t0});
}

[[noreturn]] void underflow(double t, const StateVec& s) {
  std::ostringstream msg;
  msg << "step size underflow at t = " << t << " (state norm " << s.norm() << ")";
  throw NumericalError(msg.str());
}

// Shared recording logic: emit states at requested output times (assumed to
// have been landed on exactly) or at every accepted step.
struct Recorder {
  const std::vector<double>* grid;
  const GridObserver* observer;
  IntegrationResult* out;
  size_t next = 0;

  void start(double t0, const StateVec& s0) {
    if (!grid) {
      emit(t0, s0);
      return;
    }
    while (next < grid->size() && (*grid)[next] <= t0 + 1e-12 * std::max(1.0, std::abs(t0))) {
      emit((*grid)[next], s0);
      ++next;
    }
  }

  void step_done(double t, const StateVec& s) {
    if (!grid) {
      emit(t, s);
      return;
    }
    while (next < grid->size() && (*grid)[next] <= t + 1e-12 * std::max(1.0, std::abs(t))) {
      emit((*grid)[next], s);
      ++next;
    }
  }

  // Next time the stepper must land on exactly.
  double next_stop(double t1) const {
    if (grid && next < grid->size()) return std::min((*grid)[next], t1);
    return t1;
  }

  void emit(double t, const StateVec& s) {
    out->t.push_back(t);
    out->s.push_back(s);
    if (observer) (*observer)(t, s);
  }
};

IntegrationResult run_rk4_fixed(const RateFn& f, StateVec s, double t0, double t1,
                                const IntegratorSpec& spec, const StepHook* hook,
                                const std::vector<double>* output_times,
                                const GridObserver* observer) {
  IntegrationResult out;
  Recorder rec{output_times, observer, &out};
  double t = t0;
  rec.start(t, s);
  while (t < t1 - 1e-12 * std::max(1.0, std::abs(t1))) {
    const double h = std::min(spec.step, rec.next_stop(t1) - t);
    if (!(h > 0.0)) underflow(t, s);
    s = rk4_step(f, s, t, h);
    t += h;
    ++out.steps_accepted;
    if (hook && !(*hook)(t, s)) {
      out.stopped_early = true;
      out.stop_time = t;
      rec.emit(t, s);
      return out;
    }
    rec.step_done(t, s);
  }
  return out;
}

} // namespace

IntegrationResult integrate_adaptive(const RateFn& f, StateVec s0, double t0, double t1,
                                     const IntegratorSpec& spec, const StepHook* hook,
                                     const std::vector<double>* output_times,
                                     const GridObserver* observer) {
  if (!(t1 > t0)) throw ValidationError("integration needs t1 > t0");
  spec.validate();

  IntegrationResult out;
  Recorder rec{output_times, observer, &out};
  StateVec s = std::move(s0);
  double t = t0;
  rec.start(t, s);

  StateVec k1 = f(t, s);
  bool k1_fresh = true;
  double h = initial_step(f, s, t0, t1, spec.abs_tol, spec.rel_tol, k1);

  while (t < t1 - 1e-12 * std::max(1.0, std::abs(t1))) {
    const double h_cap = rec.next_stop(t1) - t;
    double h_try = std::min(h, h_cap);
    const double h_min = 1e-13 * std::max(1.0, std::abs(t));
    if (!(h_try > h_min)) underflow(t, s);

    if (!k1_fresh) {
      k1 = f(t, s);
      k1_fresh = true;
    }
    const StateVec k2 = f(t + a21 * h_try, s + h_try * (a21 * k1));
    const StateVec k3 = f(t + 0.3 * h_try, s + h_try * (a31 * k1 + a32 * k2));
    const StateVec k4 = f(t + 0.8 * h_try, s + h_try * (a41 * k1 + a42 * k2 + a43 * k3));
    const StateVec k5 =
        f(t + 8.0 / 9.0 * h_try, s + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const StateVec k6 =
        f(t + h_try, s + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const StateVec y1 = s + h_try * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const StateVec k7 = f(t + h_try, y1);
    const StateVec err_vec =
        h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    // Error per unit step: dividing by the step length makes the accumulated
    // error scale with tolerance times horizon instead of tolerance times
    // step count, which is what long conservation audits need. Steps above
    // one time unit fall back to plain per-step control.
    double err = error_norm(err_vec, s, y1, spec.abs_tol, spec.rel_tol) /
                 std::min(h_try, 1.0);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      t += h_try;
      s = y1;
      ++out.steps_accepted;

      bool keep_going = true;
      if (hook) keep_going = (*hook)(t, s);
      // The hook may have nudged the state; only reuse the last stage when
      // nothing could have changed.
      if (hook) {
        k1_fresh = false;
      } else {
        k1 = k7;
        k1_fresh = true;
      }

      if (!keep_going) {
        out.stopped_early = true;
        out.stop_time = t;
        rec.emit(t, s);
        return out;
      }
      rec.step_done(t, s);

      // When the step was clipped to land on an output time, the natural step
      // size h stands; otherwise adapt it from the error estimate. The scaled
      // error behaves like h^4, hence the quarter-power.
      if (h_try >= h) {
        const double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.25);
        h = h_try * std::clamp(grow, 0.2, 5.0);
      }
    } else {
      ++out.steps_rejected;
      const double shrink = 0.9 * std::pow(err, -0.25);
      h = h_try * std::clamp(shrink, 0.1, 0.9);
    }
  }
  return out;
}

IntegrationResult integrate(const RateFn& f, StateVec s0, double t0, double t1,
                            const IntegratorSpec& spec, const StepHook* hook,
                            const std::vector<double>* output_times,
                            const GridObserver* observer) {
  if (!(t1 > t0)) throw ValidationError("integration needs t1 > t0");
  spec.validate();
  if (spec.method == IntegratorSpec::Method::rk4_fixed) {
    return run_rk4_fixed(f, std::move(s0), t0, t1, spec, hook, output_times, observer);
  }
  return integrate_adaptive(f, std::move(s0), t0, t1, spec, hook, output_times, observer);
}

} // namespace loco
