#pragma once
// Closed-form stationary-platform model of a single robot: wheel constraint
// covectors, the two basis fields spanning the admissible velocities, the
// coefficient functions of the momentum dynamics, the momentum-from-velocity
// map, and the pose reconstruction equations.
//
// Conventions: configuration (alpha, x, y, theta) with (x, y) the tail wheel
// contact and theta the tail heading; the joint sits half a tail length ahead
// of the tail wheel, the head wheel half a head length beyond the joint at
// heading theta + alpha. Covectors and fields are rows/columns over
// (alpha, x, y, theta) in that order.

#include <Eigen/Dense>

#include "loco/model.hpp"

namespace loco {

using Vec4 = Eigen::Vector4d;

// The four scalar coefficient functions of the reduced dynamics at a given
// joint angle.
struct CoefficientSet {
  double delta; // normalization of the scissor field, 2*(4 sin^2 a + (lh + lt cos a)^2)
  double mars;  // multiplies p in the momentum rate
  double venus; // multiplies the joint rate; identically zero for symmetric robots
  double earth; // generalized inertia, positive for every alpha
};

CoefficientSet coefficients(double alpha, const RobotParams& par);

// Coefficient of the regularized momentum chart u = p * sin(alpha):
//   du/dt = (g(alpha) * u + venus * da) * da / (4 * earth)
// which stays smooth through sin(alpha) = 0 where the p chart degenerates.
double momentum_chart_gain(double alpha, const RobotParams& par);

struct ConstraintCovectors {
  Vec4 omega_t; // annihilates lateral tail-wheel velocity
  Vec4 omega_h; // annihilates lateral head-wheel velocity
};

ConstraintCovectors constraint_forms(double alpha, double theta, const RobotParams& par);

struct BasisFields {
  Vec4 roll;    // rotation about the wheel-axle intersection; theta component 1
  Vec4 scissor; // joint opening; alpha component 1
};

// The roll field carries a 1/sin(alpha) factor; configurations with
// |sin(alpha)| <= singular_guard raise NumericalError.
BasisFields basis_fields(double alpha, double theta, const RobotParams& par,
                         double singular_guard = 1e-9);

// p = Jh*da + (rho_x*dx + rho_y*dy + rho_theta*dtheta)/4 with rates ordered
// (da, dx, dy, dtheta). Raises NumericalError at sin(alpha) = 0.
double nonholonomic_momentum(double alpha, double theta, const Vec4& rates,
                             const RobotParams& par);

// dp/dt along gait-driven dynamics. Raises NumericalError at sin(alpha) = 0,
// where p itself is not a valid coordinate.
double momentum_rate(double alpha, double p, double alpha_rate, const RobotParams& par);

// (dx, dy, dtheta) recovered from (alpha, p, alpha_rate); finite and
// continuous at sin(alpha) = 0 for finite p.
Eigen::Vector3d reconstruct_rates(double alpha, double p, double alpha_rate,
                                  double theta, const RobotParams& par);

// d/dt (p, x, y, theta); alpha and its rate are read from the gait, not from
// the state.
Vec4 reduced_vector_field(const ReducedState& s, const GaitSignal& gait, double t,
                          const RobotParams& par);

// Rate of the regularized chart state (u, x, y, theta) under a gait. Unlike
// the p chart this is regular through sin(alpha) = 0 crossings; it is the form
// integrated by the reduced-model trajectory runs.
Vec4 regularized_vector_field(const Vec4& uxyt, const GaitSignal& gait, double t,
                              const RobotParams& par);

} // namespace loco
