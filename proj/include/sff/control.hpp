#pragma once

#include "sff/dynamics.hpp"

#include <functional>
#include <vector>

namespace sff {

// Zero-order-hold accelerations on a uniform grid. N grid points carry
// N - 1 controls; control k acts on [t_k, t_k + dt).
struct ControlHistory {
  double dt = 1.0;
  std::vector<Vec3> u;

  int steps() const { return static_cast<int>(u.size()) + 1; }
  void validate() const;
};

struct Trajectory {
  double dt = 1.0;
  std::vector<HillState> x;  // N states
  std::vector<double> nu;    // chief true anomaly at each grid point

  const HillState& terminal() const { return x.back(); }
};

// RK4 propagation of the truth plant under a control history.
Trajectory predict_trajectory(const TruthPlant& plant, const HillState& x0, double nu0, const ControlHistory& controls);

struct IterationLog {
  int iteration = 0;
  Vec6 terminal_error = Vec6::Zero();
  double rho_error_pct = 0.0;
  double effort = 0.0;
};

// |rho_f - rho_d| / rho_d * 100 with rho the position-vector norm.
double rho_error_pct(const HillState& terminal, const HillState& target);

// Trapezoidal integral of u'u; the final grid point holds the last control.
double control_effort(const ControlHistory& h);

// Trapezoidal integral of u'u over samples spaced dt apart.
double trapezoid_effort(const std::vector<Vec3>& samples, double dt);

struct IterativeResult {
  ControlHistory controls;
  std::vector<IterationLog> log;
  bool converged = false;
  int iterations = 0;  // updates applied to reach the returned history
};

// Shared outer loop of the iterative terminal-constraint methods: predict,
// stop when %rho_e < tol, otherwise apply update(traj, controls, dY).
using TerminalUpdate = std::function<ControlHistory(const Trajectory&, const ControlHistory&, const Vec6&)>;
IterativeResult iterate_to_terminal(const TruthPlant& plant, const HillState& x0, double nu0, const HillState& target,
                                    double tol_rho_pct, int max_iter, const ControlHistory& guess,
                                    const TerminalUpdate& update);

}  // namespace sff
