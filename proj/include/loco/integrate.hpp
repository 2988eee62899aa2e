#pragma once
// Time integration: classical fixed-step RK4 and an adaptive Dormand-Prince
// 5(4) embedded pair with optional post-step state hook (constraint
// projection, supervisor bookkeeping) and exact landing on requested output
// times.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "loco/model.hpp"

namespace loco {

using StateVec = Eigen::VectorXd;
using RateFn = std::function<StateVec(double t, const StateVec& s)>;

// Mutates the state after an accepted step; returning false stops the
// integration at that point.
using StepHook = std::function<bool(double t, StateVec& s)>;

// Called whenever an output time is reached (and at the stop point).
using GridObserver = std::function<void(double t, const StateVec& s)>;

struct IntegratorSpec {
  enum class Method { rk4_fixed, rk45_adaptive };
  Method method = Method::rk45_adaptive;
  double step = 1e-3;    // rk4_fixed
  double abs_tol = 1e-9; // rk45_adaptive
  double rel_tol = 1e-9;
  bool projection = true; // scenario layer wires the projection hook

  void validate() const;
};

StateVec rk4_step(const RateFn& f, const StateVec& s, double t, double h);

struct IntegrationResult {
  std::vector<double> t;
  std::vector<StateVec> s;
  long steps_accepted = 0;
  long steps_rejected = 0;
  bool stopped_early = false;
  double stop_time = 0.0;
};

// Adaptive integration from t0 to t1. When output_times is given, states are
// recorded exactly at those times (steps are clipped to land on them);
// otherwise every accepted step is recorded. Raises NumericalError on
// step-size underflow, reporting time and state norm.
IntegrationResult integrate_adaptive(const RateFn& f, StateVec s0, double t0, double t1,
                                     const IntegratorSpec& spec,
                                     const StepHook* hook = nullptr,
                                     const std::vector<double>* output_times = nullptr,
                                     const GridObserver* observer = nullptr);

// Method dispatch: rk45_adaptive goes to integrate_adaptive, rk4_fixed walks
// the same recording logic with a constant step.
IntegrationResult integrate(const RateFn& f, StateVec s0, double t0, double t1,
                            const IntegratorSpec& spec,
                            const StepHook* hook = nullptr,
                            const std::vector<double>* output_times = nullptr,
                            const GridObserver* observer = nullptr);

} // namespace loco
