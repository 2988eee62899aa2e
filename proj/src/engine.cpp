#include "loco/engine.hpp"

#include <cmath>
#include <sstream>

namespace loco {

namespace {

// Singular values of the extended constraint matrix below this fraction of the
// largest one count as rank deficiency.
constexpr double kRankTol = 1e-8;

} // namespace

EngineConfig::EngineConfig(std::vector<RobotSlot> robots, PlatformParams platform)
    : robots_(std::move(robots)), platform_(platform) {
  if (robots_.empty()) {
    throw ValidationError("at least one robot is required");
  }
  for (size_t i = 0; i < robots_.size(); ++i) {
    std::ostringstream prefix;
    prefix << "robots[" << i << "].";
    validate_robot(robots_[i].params, prefix.str());
  }
  if (platform_.mode == PlatformMode::free_floating && !(platform_.mass > 0.0)) {
    std::ostringstream msg;
    msg << "platform.mass must be positive in free mode (got " << platform_.mass << ")";
    throw ValidationError(msg.str());
  }
}

int EngineConfig::coord_count() const {
  return 4 * robot_count() + (has_platform_coords() ? 2 : 0);
}

std::vector<int> EngineConfig::prescribed_coords() const {
  std::vector<int> out;
  for (int i = 0; i < robot_count(); ++i) {
    if (robots_[i].gait) out.push_back(4 * i);
  }
  if (platform_.mode == PlatformMode::accelerated) {
    out.push_back(platform_index());
    out.push_back(platform_index() + 1);
  }
  return out;
}

std::string EngineConfig::coordinate_name(int i) const {
  if (has_platform_coords() && i >= platform_index()) {
    return i == platform_index() ? "X" : "Y";
  }
  static const char* base[] = {"alpha", "x", "y", "theta"};
  std::ostringstream name;
  name << base[i % 4] << "_" << i / 4;
  return name.str();
}

Mat mass_matrix(const EngineConfig& cfg, const Vec& q) {
  const int nq = cfg.coord_count();
  const bool hp = cfg.has_platform_coords();
  const int ip = cfg.platform_index();
  Mat M = Mat::Zero(nq, nq);

  for (int i = 0; i < cfg.robot_count(); ++i) {
    const RobotParams& par = cfg.robots()[i].params;
    const double mh = par.head.mass, mt = par.tail.mass;
    const double lh = par.head.length, lt = par.tail.length;
    const double Jh = par.head.inertia, Jt = par.tail.inertia;
    const int b = 4 * i;
    const double a = q[b], th = q[b + 3];
    const double c1 = std::cos(th), s1 = std::sin(th);
    const double c2 = std::cos(th + a), s2 = std::sin(th + a);

    // Tail link: world center velocity (dx + dX, dy + dY), spin dtheta.
    Mat jt = Mat::Zero(2, nq);
    jt(0, b + 1) = 1.0;
    jt(1, b + 2) = 1.0;
    if (hp) {
      jt(0, ip) = 1.0;
      jt(1, ip + 1) = 1.0;
    }
    // Head link: center half a head length beyond the joint, spin dalpha + dtheta.
    Mat jh = Mat::Zero(2, nq);
    jh(0, b) = -lh / 2.0 * s2;
    jh(0, b + 1) = 1.0;
    jh(0, b + 3) = -lt / 2.0 * s1 - lh / 2.0 * s2;
    jh(1, b) = lh / 2.0 * c2;
    jh(1, b + 2) = 1.0;
    jh(1, b + 3) = lt / 2.0 * c1 + lh / 2.0 * c2;
    if (hp) {
      jh(0, ip) = 1.0;
      jh(1, ip + 1) = 1.0;
    }

    M += mt * jt.transpose() * jt + mh * jh.transpose() * jh;
    M(b + 3, b + 3) += Jt;
    M(b, b) += Jh;
    M(b, b + 3) += Jh;
    M(b + 3, b) += Jh;
    M(b + 3, b + 3) += Jh;
  }

  if (cfg.platform().mode == PlatformMode::free_floating) {
    M(ip, ip) += cfg.platform().mass;
    M(ip + 1, ip + 1) += cfg.platform().mass;
  } else if (cfg.platform().mode == PlatformMode::accelerated) {
    // Unit bookkeeping mass keeps M invertible on the pinned coordinates; the
    // pins fix their accelerations, so the value never affects the dynamics.
    M(ip, ip) += 1.0;
    M(ip + 1, ip + 1) += 1.0;
  }
  return M;
}

Mat constraint_matrix(const EngineConfig& cfg, const Vec& q) {
  Mat A = Mat::Zero(2 * cfg.robot_count(), cfg.coord_count());
  for (int i = 0; i < cfg.robot_count(); ++i) {
    const RobotParams& par = cfg.robots()[i].params;
    const int b = 4 * i;
    const double a = q[b], th = q[b + 3];
    A(2 * i, b + 1) = -std::sin(th);
    A(2 * i, b + 2) = std::cos(th);
    A(2 * i + 1, b) = par.head.length / 2.0;
    A(2 * i + 1, b + 1) = -std::sin(th + a);
    A(2 * i + 1, b + 2) = std::cos(th + a);
    A(2 * i + 1, b + 3) = (par.head.length + par.tail.length * std::cos(a)) / 2.0;
  }
  return A;
}

Vec constraint_rate_product(const EngineConfig& cfg, const Vec& q, const Vec& qd) {
  Vec r = Vec::Zero(2 * cfg.robot_count());
  for (int i = 0; i < cfg.robot_count(); ++i) {
    const RobotParams& par = cfg.robots()[i].params;
    const int b = 4 * i;
    const double a = q[b], th = q[b + 3];
    const double ad = qd[b], xd = qd[b + 1], yd = qd[b + 2], thd = qd[b + 3];
    r[2 * i] = -std::cos(th) * thd * xd - std::sin(th) * thd * yd;
    r[2 * i + 1] = -std::cos(th + a) * (thd + ad) * xd
                 - std::sin(th + a) * (thd + ad) * yd
                 - par.tail.length / 2.0 * std::sin(a) * ad * thd;
  }
  return r;
}

Vec generalized_forces(const EngineConfig& cfg, const Vec& q) {
  Vec Q = Vec::Zero(cfg.coord_count());
  for (int i = 0; i < cfg.robot_count(); ++i) {
    if (!cfg.robots()[i].gait) {
      Q[4 * i] = -cfg.robots()[i].params.spring_stiffness * q[4 * i];
    }
  }
  return Q;
}

Vec velocity_bias(const EngineConfig& cfg, const Vec& q, const Vec& qd) {
  const int nq = cfg.coord_count();
  const bool hp = cfg.has_platform_coords();
  const int ip = cfg.platform_index();
  Vec h = Vec::Zero(nq);

  for (int i = 0; i < cfg.robot_count(); ++i) {
    const RobotParams& par = cfg.robots()[i].params;
    const double mh = par.head.mass;
    const double lh = par.head.length, lt = par.tail.length;
    const int b = 4 * i;
    const double a = q[b], th = q[b + 3];
    const double ad = qd[b], thd = qd[b + 3];
    const double c1 = std::cos(th), s1 = std::sin(th);
    const double c2 = std::cos(th + a), s2 = std::sin(th + a);
    const double d2 = thd + ad;

    // Only the head Jacobian depends on the configuration; its time derivative
    // contracted with qd gives the centripetal terms.
    Mat jh = Mat::Zero(2, nq);
    jh(0, b) = -lh / 2.0 * s2;
    jh(0, b + 1) = 1.0;
    jh(0, b + 3) = -lt / 2.0 * s1 - lh / 2.0 * s2;
    jh(1, b) = lh / 2.0 * c2;
    jh(1, b + 2) = 1.0;
    jh(1, b + 3) = lt / 2.0 * c1 + lh / 2.0 * c2;
    if (hp) {
      jh(0, ip) = 1.0;
      jh(1, ip + 1) = 1.0;
    }
    Eigen::Vector2d jd_qd;
    jd_qd[0] = -lh / 2.0 * c2 * d2 * ad + (-lt / 2.0 * c1 * thd - lh / 2.0 * c2 * d2) * thd;
    jd_qd[1] = -lh / 2.0 * s2 * d2 * ad + (-lt / 2.0 * s1 * thd - lh / 2.0 * s2 * d2) * thd;

    h += mh * jh.transpose() * jd_qd;
  }
  return h;
}

std::string constraint_row_label(const EngineConfig& cfg, int row) {
  std::ostringstream label;
  label << "robot " << row / 2 << (row % 2 == 0 ? " tail wheel" : " head wheel");
  (void)cfg;
  return label.str();
}

namespace {

std::string extended_row_label(const EngineConfig& cfg, int row) {
  const int nc = 2 * cfg.robot_count();
  if (row < nc) return constraint_row_label(cfg, row);
  const std::vector<int> pins = cfg.prescribed_coords();
  return cfg.coordinate_name(pins[row - nc]) + " pin";
}

} // namespace

struct PinnedSolve::Impl {
  const EngineConfig* cfg;
  int nq, nc, np;
  Mat M;
  Eigen::LLT<Mat> mass_llt;
  Mat a_ext;
  Vec rhs_base;
  Vec f;
  Vec minv_f;
  Mat minv_aext_t;
  Eigen::LDLT<Mat> schur;
  int px_row = -1, py_row = -1;
  std::vector<int> pins;

  Impl(const EngineConfig& cfg_in, const Vec& q, const Vec& qd, double t)
      : cfg(&cfg_in), nq(cfg_in.coord_count()) {
    pins = cfg->prescribed_coords();
    nc = 2 * cfg->robot_count();
    np = static_cast<int>(pins.size());

    M = mass_matrix(*cfg, q);
    mass_llt.compute(M);

    a_ext = Mat::Zero(nc + np, nq);
    a_ext.topRows(nc) = constraint_matrix(*cfg, q);
    rhs_base = Vec::Zero(nc + np);
    rhs_base.head(nc) = -constraint_rate_product(*cfg, q, qd);
    for (int j = 0; j < np; ++j) {
      a_ext(nc + j, pins[j]) = 1.0;
      if (pins[j] >= 4 * cfg->robot_count()) {
        // Platform pin; rhs patched with the commanded acceleration per solve.
        (pins[j] == cfg->platform_index() ? px_row : py_row) = nc + j;
      } else if (const auto& gait = cfg->robots()[pins[j] / 4].gait) {
        rhs_base[nc + j] = gait_eval(*gait, t).accel;
      }
    }

    check_rank();

    f = generalized_forces(*cfg, q) - velocity_bias(*cfg, q, qd);
    minv_f = mass_llt.solve(f);
    minv_aext_t = mass_llt.solve(a_ext.transpose());
    Mat S = a_ext * minv_aext_t;
    S = 0.5 * (S + S.transpose()).eval();
    schur.compute(S);
  }

  void check_rank() const {
    Eigen::JacobiSVD<Mat> svd(a_ext, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    const double smax = sv[0];
    const double smin = sv[sv.size() - 1];
    if (smin >= kRankTol * smax) return;

    // The left singular vector of the vanishing direction weights the rows
    // involved in the dependency; report the two heaviest.
    const Vec u = svd.matrixU().col(sv.size() - 1).cwiseAbs();
    int first = 0;
    for (int i = 1; i < u.size(); ++i)
      if (u[i] > u[first]) first = i;
    int second = first == 0 ? 1 : 0;
    for (int i = 0; i < u.size(); ++i)
      if (i != first && u[i] > u[second]) second = i;

    std::ostringstream msg;
    msg << "dependent constraint rows: " << extended_row_label(*cfg, first)
        << " and " << extended_row_label(*cfg, second)
        << " (singular value ratio " << smin / smax << ")";
    throw NumericalError(msg.str());
  }

  Vec multipliers(const PlatformAccel& input) const {
    Vec b = rhs_base;
    if (px_row >= 0) {
      b[px_row] = input.ax;
      b[py_row] = input.ay;
    }
    return schur.solve(b - a_ext * minv_f);
  }

  // The solve satisfies the pin rows only to factorization accuracy; overwrite
  // the prescribed entries with their exact pinned values.
  void stamp_pins(Vec& a, const PlatformAccel& input) const {
    for (int j = 0; j < np; ++j) {
      double v = rhs_base[nc + j];
      if (nc + j == px_row) v = input.ax;
      if (nc + j == py_row) v = input.ay;
      a[pins[j]] = v;
    }
  }
};

PinnedSolve::PinnedSolve(const EngineConfig& cfg, const Vec& q, const Vec& qd, double t)
    : impl_(std::make_unique<Impl>(cfg, q, qd, t)) {}
PinnedSolve::~PinnedSolve() = default;
PinnedSolve::PinnedSolve(PinnedSolve&&) noexcept = default;

Vec PinnedSolve::accel(const PlatformAccel& input) const {
  const Vec mu = impl_->multipliers(input);
  Vec a = impl_->minv_f + impl_->minv_aext_t * mu;
  impl_->stamp_pins(a, input);
  return a;
}

ConstrainedAccelResult PinnedSolve::full(const PlatformAccel& input) const {
  const Vec mu = impl_->multipliers(input);
  ConstrainedAccelResult out;
  out.accel = impl_->minv_f + impl_->minv_aext_t * mu;
  impl_->stamp_pins(out.accel, input);
  out.multipliers = mu.head(impl_->nc);
  out.pin_forces = mu.tail(impl_->np);
  const Vec d = out.accel - impl_->minv_f;
  out.gauss = 0.5 * d.dot(impl_->M * d);
  return out;
}

ConstrainedAccelResult constrained_accel(const EngineConfig& cfg, const Vec& q,
                                         const Vec& qd, double t,
                                         const PlatformAccel& input) {
  return PinnedSolve(cfg, q, qd, t).full(input);
}

double gauss_value(const EngineConfig& cfg, const Vec& q, const Vec& qd, const Vec& qdd) {
  const Mat M = mass_matrix(cfg, q);
  const Vec f = generalized_forces(cfg, q) - velocity_bias(cfg, q, qd);
  const Vec d = qdd - Eigen::LLT<Mat>(M).solve(f);
  return 0.5 * d.dot(M * d);
}

EnergyBreakdown energy(const EngineConfig& cfg, const Vec& q, const Vec& qd) {
  EnergyBreakdown e;
  e.kinetic = 0.5 * qd.dot(mass_matrix(cfg, q) * qd);
  if (cfg.platform().mode == PlatformMode::accelerated) {
    const int ip = cfg.platform_index();
    e.kinetic -= 0.5 * (qd[ip] * qd[ip] + qd[ip + 1] * qd[ip + 1]);
  }
  e.potential = 0.0;
  for (int i = 0; i < cfg.robot_count(); ++i) {
    if (!cfg.robots()[i].gait) {
      const double k = cfg.robots()[i].params.spring_stiffness;
      e.potential += 0.5 * k * q[4 * i] * q[4 * i];
    }
  }
  return e;
}

namespace {

// World velocities of the two link centers of robot i.
void link_velocities(const EngineConfig& cfg, const Vec& q, const Vec& qd, int i,
                     Eigen::Vector2d& v_tail, Eigen::Vector2d& v_head) {
  const RobotParams& par = cfg.robots()[i].params;
  const double lh = par.head.length, lt = par.tail.length;
  const int b = 4 * i;
  const double a = q[b], th = q[b + 3];
  Eigen::Vector2d vp = Eigen::Vector2d::Zero();
  if (cfg.has_platform_coords()) {
    vp << qd[cfg.platform_index()], qd[cfg.platform_index() + 1];
  }
  v_tail = Eigen::Vector2d(qd[b + 1], qd[b + 2]) + vp;
  v_head = Eigen::Vector2d(
               qd[b + 1] - lh / 2.0 * std::sin(th + a) * (qd[b] + qd[b + 3])
                   - lt / 2.0 * std::sin(th) * qd[b + 3],
               qd[b + 2] + lh / 2.0 * std::cos(th + a) * (qd[b] + qd[b + 3])
                   + lt / 2.0 * std::cos(th) * qd[b + 3])
         + vp;
}

} // namespace

Eigen::Vector2d system_momentum(const EngineConfig& cfg, const Vec& q, const Vec& qd) {
  Eigen::Vector2d P = Eigen::Vector2d::Zero();
  for (int i = 0; i < cfg.robot_count(); ++i) {
    Eigen::Vector2d vt, vh;
    link_velocities(cfg, q, qd, i, vt, vh);
    P += cfg.robots()[i].params.tail.mass * vt + cfg.robots()[i].params.head.mass * vh;
  }
  if (cfg.platform().mode == PlatformMode::free_floating) {
    P += cfg.platform().mass
         * Eigen::Vector2d(qd[cfg.platform_index()], qd[cfg.platform_index() + 1]);
  }
  return P;
}

double translational_kinetic_energy(const EngineConfig& cfg, const Vec& q, const Vec& qd) {
  double ke = 0.0;
  for (int i = 0; i < cfg.robot_count(); ++i) {
    Eigen::Vector2d vt, vh;
    link_velocities(cfg, q, qd, i, vt, vh);
    ke += 0.5 * cfg.robots()[i].params.tail.mass * vt.squaredNorm()
        + 0.5 * cfg.robots()[i].params.head.mass * vh.squaredNorm();
  }
  if (cfg.platform().mode == PlatformMode::free_floating) {
    const int ip = cfg.platform_index();
    ke += 0.5 * cfg.platform().mass * (qd[ip] * qd[ip] + qd[ip + 1] * qd[ip + 1]);
  }
  return ke;
}

double constraint_residual(const EngineConfig& cfg, const Vec& q, const Vec& qd) {
  const Mat A = constraint_matrix(cfg, q);
  const Vec r = A * qd;
  double worst = 0.0;
  for (int i = 0; i < r.size(); ++i) {
    worst = std::max(worst, std::abs(r[i]) / A.row(i).norm());
  }
  return worst;
}

Vec project_velocities(const EngineConfig& cfg, const Vec& q, const Vec& qd) {
  const std::vector<int> pins = cfg.prescribed_coords();
  const int nc = 2 * cfg.robot_count();
  const int np = static_cast<int>(pins.size());
  const int nq = cfg.coord_count();

  Mat a_ext = Mat::Zero(nc + np, nq);
  a_ext.topRows(nc) = constraint_matrix(cfg, q);
  for (int j = 0; j < np; ++j) a_ext(nc + j, pins[j]) = 1.0;

  Vec rhs = Vec::Zero(nc + np);
  rhs.head(nc) = -a_ext.topRows(nc) * qd;

  const Eigen::LLT<Mat> mass_llt(mass_matrix(cfg, q));
  const Mat minv_at = mass_llt.solve(a_ext.transpose());
  Mat S = a_ext * minv_at;
  S = 0.5 * (S + S.transpose()).eval();
  const Vec mu = Eigen::LDLT<Mat>(S).solve(rhs);
  return qd + minv_at * mu;
}

} // namespace loco
