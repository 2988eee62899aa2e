#pragma once
// Full-coordinate constrained-dynamics backend. Assembles mass matrix,
// constraint rows, and generalized forces for N robots on a stationary, free,
// or externally accelerated platform, and solves for accelerations by
// minimizing the Gauss function over the admissible set (equivalently, the
// Lagrange-multiplier form of the equations of motion).
//
// Coordinate layout: robot i occupies indices [4i .. 4i+3] as
// (alpha_i, x_i, y_i, theta_i), with (x, y, theta) the platform-relative pose
// of the tail wheel contact. When the platform is not stationary, its inertial
// position (X, Y) occupies the last two indices. Wheel no-slip constraints act
// on platform-relative velocities, so constraint rows never touch the
// platform columns.

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "loco/model.hpp"

namespace loco {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One robot in an assembled system: gait-driven (joint angle prescribed at the
// acceleration level) or passive (joint free, spring torque acts).
struct RobotSlot {
  RobotParams params;
  std::optional<GaitSignal> gait;
};

// Commanded inertial-frame platform acceleration; used when the platform mode
// is `accelerated`, ignored otherwise.
struct PlatformAccel {
  double ax = 0.0;
  double ay = 0.0;
};

class EngineConfig {
 public:
  EngineConfig(std::vector<RobotSlot> robots, PlatformParams platform);

  int robot_count() const { return static_cast<int>(robots_.size()); }
  int coord_count() const;
  bool has_platform_coords() const { return platform_.mode != PlatformMode::stationary; }
  int platform_index() const { return 4 * robot_count(); }
  const std::vector<RobotSlot>& robots() const { return robots_; }
  const PlatformParams& platform() const { return platform_; }

  // Prescribed coordinate indices: gait-driven joints, then platform X, Y in
  // accelerated mode.
  std::vector<int> prescribed_coords() const;
  std::string coordinate_name(int i) const;

 private:
  std::vector<RobotSlot> robots_;
  PlatformParams platform_;
};

struct FullState {
  Vec q;
  Vec qd;
};

// Hessian of the total kinetic energy in the rates. Link-center velocities
// include the platform velocity when the platform coordinates are present; in
// accelerated mode the pinned platform coordinates get a unit bookkeeping mass
// so the matrix stays invertible (energy accounting subtracts it again).
Mat mass_matrix(const EngineConfig& cfg, const Vec& q);

// Wheel constraint rows A(q), two per robot, A * qd = 0 on admissible rates.
Mat constraint_matrix(const EngineConfig& cfg, const Vec& q);

// The term (dA/dt) qd appearing in the acceleration-level constraints.
Vec constraint_rate_product(const EngineConfig& cfg, const Vec& q, const Vec& qd);

// Generalized forces: spring torque -k*alpha on each passive joint.
Vec generalized_forces(const EngineConfig& cfg, const Vec& q);

// Velocity-product bias h(q, qd), with M qdd + h = Q along unconstrained motion.
Vec velocity_bias(const EngineConfig& cfg, const Vec& q, const Vec& qd);

std::string constraint_row_label(const EngineConfig& cfg, int row);

struct ConstrainedAccelResult {
  Vec accel;       // all coordinates, prescribed entries carry their pinned values
  Vec multipliers; // one per wheel constraint row
  Vec pin_forces;  // one per prescribed coordinate
  double gauss;    // Gauss function value at the solution
};

// Shared factorization for repeated solves at one (q, qd, t) differing only in
// the commanded platform acceleration. The heading controller probes the
// dynamics through this.
class PinnedSolve {
 public:
  PinnedSolve(const EngineConfig& cfg, const Vec& q, const Vec& qd, double t);
  ~PinnedSolve();
  PinnedSolve(PinnedSolve&&) noexcept;

  Vec accel(const PlatformAccel& input = {}) const;
  ConstrainedAccelResult full(const PlatformAccel& input = {}) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot constrained solve. Raises NumericalError when constraint rows are
// linearly dependent, naming the offending row pair.
ConstrainedAccelResult constrained_accel(const EngineConfig& cfg, const Vec& q,
                                         const Vec& qd, double t,
                                         const PlatformAccel& input = {});

// G(qdd) = (qdd - M^-1 f)^T M (qdd - M^-1 f) / 2 with f the applied force
// minus the velocity bias.
double gauss_value(const EngineConfig& cfg, const Vec& q, const Vec& qd, const Vec& qdd);

struct EnergyBreakdown {
  double kinetic;
  double potential;
};

// Kinetic energy of all links (plus the platform in free mode) and spring
// potential over passive joints. Excludes the accelerated-mode bookkeeping mass.
EnergyBreakdown energy(const EngineConfig& cfg, const Vec& q, const Vec& qd);

// Total inertial-frame linear momentum of all links plus the platform.
Eigen::Vector2d system_momentum(const EngineConfig& cfg, const Vec& q, const Vec& qd);

// Translational part of the kinetic energy (no link rotation terms).
double translational_kinetic_energy(const EngineConfig& cfg, const Vec& q, const Vec& qd);

// max_i |row_i . qd| / |row_i| over the wheel constraint rows.
double constraint_residual(const EngineConfig& cfg, const Vec& q, const Vec& qd);

// Minimal M-norm correction of qd onto the constraint set, keeping prescribed
// coordinate rates fixed. Applied after accepted integration steps.
Vec project_velocities(const EngineConfig& cfg, const Vec& q, const Vec& qd);

} // namespace loco
