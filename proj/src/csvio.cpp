#include "loco/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "loco/model.hpp"

namespace loco {

namespace {

std::string header_line(const Trajectory& traj) {
  std::ostringstream h;
  h << "t";
  for (int i = 1; i <= traj.robot_count; ++i) {
    h << ",alpha_" << i << ",dalpha_" << i << ",x_" << i << ",y_" << i << ",theta_" << i;
  }
  h << ",X,Y,dX,dY,E_kin,E_pot,P_X,P_Y,c_res";
  if (traj.has_control) h << ",theta_d,u_theta,c_x,c_y";
  return h.str();
}

void append(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, ",%.17g", v);
  line += buf;
}

} // namespace

void write_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  out << header_line(traj) << "\n";

  for (const TrajectorySample& s : traj.samples) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", s.t);
    std::string line = buf;
    for (int i = 0; i < traj.robot_count; ++i) {
      append(line, s.q[4 * i]);
      append(line, s.qd[4 * i]);
      append(line, s.q[4 * i + 1]);
      append(line, s.q[4 * i + 2]);
      append(line, s.q[4 * i + 3]);
    }
    const Eigen::Vector2d xp = traj.platform_position(s);
    const Eigen::Vector2d vp = traj.platform_velocity(s);
    append(line, xp[0]);
    append(line, xp[1]);
    append(line, vp[0]);
    append(line, vp[1]);
    append(line, s.e_kin);
    append(line, s.e_pot);
    append(line, s.momentum[0]);
    append(line, s.momentum[1]);
    append(line, s.c_res);
    if (traj.has_control) {
      append(line, s.theta_d);
      append(line, s.u_theta);
      append(line, s.c_x);
      append(line, s.c_y);
    }
    out << line << "\n";
  }
  if (!out) throw ValidationError("write to '" + path + "' failed");
}

Trajectory read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("'" + path + "' is empty");

  // Infer layout from the header.
  int robots = 0;
  bool control = false;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) {
      if (col.rfind("alpha_", 0) == 0) ++robots;
      if (col == "c_y") control = true;
    }
  }
  if (robots == 0) throw ValidationError("'" + path + "' has no robot columns");

  Trajectory traj;
  traj.robot_count = robots;
  traj.has_platform_coords = true; // X, Y columns parse into the state
  traj.has_control = control;

  const size_t expected = 1 + 5 * robots + 9 + (control ? 4 : 0);
  std::vector<double> vals;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    vals.clear();
    const char* p = line.c_str();
    char* endp = nullptr;
    while (true) {
      vals.push_back(std::strtod(p, &endp));
      if (*endp != ',') break;
      p = endp + 1;
    }
    if (vals.size() != expected) {
      std::ostringstream msg;
      msg << "'" << path << "' line " << lineno << ": expected " << expected
          << " fields, got " << vals.size();
      throw ValidationError(msg.str());
    }

    TrajectorySample s;
    s.t = vals[0];
    s.q = Eigen::VectorXd::Zero(4 * robots + 2);
    s.qd = Eigen::VectorXd::Zero(4 * robots + 2);
    size_t k = 1;
    for (int i = 0; i < robots; ++i) {
      s.q[4 * i] = vals[k++];
      s.qd[4 * i] = vals[k++];
      s.q[4 * i + 1] = vals[k++];
      s.q[4 * i + 2] = vals[k++];
      s.q[4 * i + 3] = vals[k++];
    }
    s.q[4 * robots] = vals[k++];
    s.q[4 * robots + 1] = vals[k++];
    s.qd[4 * robots] = vals[k++];
    s.qd[4 * robots + 1] = vals[k++];
    s.e_kin = vals[k++];
    s.e_pot = vals[k++];
    s.momentum[0] = vals[k++];
    s.momentum[1] = vals[k++];
    s.c_res = vals[k++];
    if (control) {
      s.theta_d = vals[k++];
      s.u_theta = vals[k++];
      s.c_x = vals[k++];
      s.c_y = vals[k++];
    }
    traj.samples.push_back(std::move(s));
  }
  return traj;
}

} // namespace loco
