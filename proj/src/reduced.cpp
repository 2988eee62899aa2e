#include "loco/reduced.hpp"

#include <sstream>

namespace loco {

namespace {

[[noreturn]] void singular_configuration(double alpha, const char* what) {
  std::ostringstream msg;
  msg << "singular configuration: " << what
      << " undefined at sin(alpha) = 0 (alpha = " << alpha << ")";
  throw NumericalError(msg.str());
}

} // namespace

CoefficientSet coefficients(double alpha, const RobotParams& par) {
  const double mh = par.head.mass, mt = par.tail.mass;
  const double lh = par.head.length, lt = par.tail.length;
  const double Jh = par.head.inertia, Jt = par.tail.inertia;
  const double ca = std::cos(alpha), c2a = std::cos(2.0 * alpha);

  CoefficientSet c;
  c.delta = 4.0 + 2.0 * lh * lh + lt * lt + 4.0 * lh * lt * ca + (lt * lt - 4.0) * c2a;
  c.earth = 4.0 * Jh + 4.0 * Jt + (mh + 2.0 * mt) * lh * lh + (2.0 * mh + mt) * lt * lt
          + 4.0 * (mh + mt) * lh * lt * ca
          + (mh * lh * lh + mt * lt * lt - 4.0 * Jh - 4.0 * Jt) * c2a;
  c.mars = -4.0 * (mh + mt) * (2.0 * (lh * lh + lt * lt) * ca + lh * lt * (3.0 + c2a));
  c.venus = -8.0 * (mh + mt) * (Jt * lh * lh - Jh * lt * lt) * ca
          + lh * lt * (4.0 * Jh * (2.0 * mh + mt) - 4.0 * Jt * (mh + 2.0 * mt)
                       + mh * mt * (lh - lt) * (lh + lt)
                       + (4.0 * Jh * mt - 4.0 * Jt * mh + mh * mt * (lt * lt - lh * lh)) * c2a);
  return c;
}

double momentum_chart_gain(double alpha, const RobotParams& par) {
  const double mh = par.head.mass, mt = par.tail.mass;
  const double lh = par.head.length, lt = par.tail.length;
  const double Jh = par.head.inertia, Jt = par.tail.inertia;
  return 8.0 * std::sin(alpha)
       * ((4.0 * (Jh + Jt) - mh * lh * lh - mt * lt * lt) * std::cos(alpha)
          - (mh + mt) * lh * lt);
}

ConstraintCovectors constraint_forms(double alpha, double theta, const RobotParams& par) {
  const double lh = par.head.length, lt = par.tail.length;
  ConstraintCovectors c;
  c.omega_t << 0.0, -std::sin(theta), std::cos(theta), 0.0;
  c.omega_h << lh / 2.0, -std::sin(theta + alpha), std::cos(theta + alpha),
      (lh + lt * std::cos(alpha)) / 2.0;
  return c;
}

BasisFields basis_fields(double alpha, double theta, const RobotParams& par,
                         double singular_guard) {
  const double lh = par.head.length, lt = par.tail.length;
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  if (std::abs(sa) <= singular_guard) singular_configuration(alpha, "roll field");

  BasisFields b;
  const double f = (lh + lt * ca) / (2.0 * sa);
  b.roll << 0.0, f * std::cos(theta), f * std::sin(theta), 1.0;

  const double delta = coefficients(alpha, par).delta;
  b.scissor << 1.0, 4.0 * lh * sa * std::cos(theta) / delta,
      4.0 * lh * sa * std::sin(theta) / delta,
      -2.0 * lh * (lh + lt * ca) / delta;
  return b;
}

double nonholonomic_momentum(double alpha, double theta, const Vec4& rates,
                             const RobotParams& par) {
  const double mh = par.head.mass, mt = par.tail.mass;
  const double lh = par.head.length, lt = par.tail.length;
  const double Jh = par.head.inertia, Jt = par.tail.inertia;
  const double sa = std::sin(alpha), ca = std::cos(alpha);
  if (sa == 0.0) singular_configuration(alpha, "nonholonomic momentum");

  const double G = 2.0 * (mh + mt) * lt * ca + lh * (mh + 2.0 * mt + mh * std::cos(2.0 * alpha));
  const double B = 2.0 * mh * (lt + lh * ca);
  const double rho_x = (G * std::cos(theta) - B * sa * std::sin(theta)) / sa;
  const double rho_y = B * std::cos(theta) + G * std::sin(theta) / sa;
  const double rho_theta = 4.0 * (Jh + Jt) + mh * lt * lt + mh * lh * lt * ca;
  return Jh * rates[0]
       + 0.25 * (rho_x * rates[1] + rho_y * rates[2] + rho_theta * rates[3]);
}

double momentum_rate(double alpha, double p, double alpha_rate, const RobotParams& par) {
  if (alpha_rate == 0.0) return 0.0; // a resting joint changes no momentum
  const double sa = std::sin(alpha);
  if (sa == 0.0) singular_configuration(alpha, "momentum rate");
  const CoefficientSet c = coefficients(alpha, par);
  return (c.mars * p + c.venus * alpha_rate) * alpha_rate / (4.0 * c.earth * sa);
}

namespace {

// Shared pieces of the reconstruction display.
struct ReconTerms {
  double earth;
  double p_factor;     // multiplies p in the translational bracket
  double rate_factor;  // multiplies alpha_rate in the translational bracket
  double theta_brace;  // multiplies alpha_rate in the heading equation
};

ReconTerms recon_terms(double alpha, const RobotParams& par) {
  const double mh = par.head.mass, mt = par.tail.mass;
  const double lh = par.head.length, lt = par.tail.length;
  const double Jh = par.head.inertia, Jt = par.tail.inertia;
  const double ca = std::cos(alpha);

  ReconTerms t;
  t.earth = coefficients(alpha, par).earth;
  t.p_factor = 4.0 * (lh + lt * ca);
  t.rate_factor = lh * (4.0 * Jt + mh * lt * lt) + (mh * lh * lh - 4.0 * Jh) * lt * ca;
  t.theta_brace = 4.0 * Jh + (mh + 2.0 * mt) * lh * lh
                + 2.0 * (mh + mt) * lh * lt * ca
                + (mh * lh * lh - 4.0 * Jh) * std::cos(2.0 * alpha);
  return t;
}

} // namespace

Eigen::Vector3d reconstruct_rates(double alpha, double p, double alpha_rate,
                                  double theta, const RobotParams& par) {
  const ReconTerms t = recon_terms(alpha, par);
  const double sa = std::sin(alpha);
  const double bracket = t.p_factor * p + t.rate_factor * alpha_rate;
  Eigen::Vector3d out;
  out[0] = std::cos(theta) * sa / t.earth * bracket;
  out[1] = std::sin(theta) * sa / t.earth * bracket;
  out[2] = (8.0 * p * sa * sa - t.theta_brace * alpha_rate) / t.earth;
  return out;
}

Vec4 reduced_vector_field(const ReducedState& s, const GaitSignal& gait, double t,
                          const RobotParams& par) {
  const GaitSample g = gait_eval(gait, t);
  const Eigen::Vector3d pose_rates =
      reconstruct_rates(g.angle, s.momentum, g.rate, s.theta, par);
  Vec4 out;
  out << momentum_rate(g.angle, s.momentum, g.rate, par), pose_rates[0],
      pose_rates[1], pose_rates[2];
  return out;
}

Vec4 regularized_vector_field(const Vec4& uxyt, const GaitSignal& gait, double t,
                              const RobotParams& par) {
  const GaitSample g = gait_eval(gait, t);
  const double sa = std::sin(g.angle);
  const double u = uxyt[0], theta = uxyt[3];
  const CoefficientSet c = coefficients(g.angle, par);
  const ReconTerms rt = recon_terms(g.angle, par);

  // Same equations as momentum_rate / reconstruct_rates with p = u / sin(alpha);
  // every 1/sin(alpha) cancels, so crossings of alpha = 0 are regular.
  const double bracket = rt.p_factor * u + rt.rate_factor * sa * g.rate;
  Vec4 out;
  out[0] = (momentum_chart_gain(g.angle, par) * u + c.venus * g.rate) * g.rate / (4.0 * c.earth);
  out[1] = std::cos(theta) / rt.earth * bracket;
  out[2] = std::sin(theta) / rt.earth * bracket;
  out[3] = (8.0 * u * sa - rt.theta_brace * g.rate) / rt.earth;
  return out;
}

} // namespace loco
