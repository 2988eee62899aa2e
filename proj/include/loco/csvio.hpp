#pragma once
// Trajectory persistence. Columns, in order: t, then per robot i (1-based)
// alpha_i, dalpha_i, x_i, y_i, theta_i, then platform X, Y, dX, dY, then
// E_kin, E_pot, P_X, P_Y, c_res; controller runs append theta_d, u_theta,
// c_x, c_y. Numbers carry 17 significant digits so parsing reproduces the
// doubles bit for bit.

#include <string>

#include "loco/trajectory.hpp"

namespace loco {

void write_csv(const Trajectory& traj, const std::string& path);
Trajectory read_csv(const std::string& path);

} // namespace loco
