#include "sff/control.hpp"

#include <cmath>
#include <sstream>

namespace sff {

void ControlHistory::validate() const {
  if (!(dt > 0.0)) throw DomainError("control history: dt must be positive");
  if (u.empty()) throw DomainError("control history: need at least two grid points");
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!u[k].allFinite()) {
      std::ostringstream os;
      os << "control history: non-finite control at step " << k;
      throw DomainError(os.str());
    }
}

Trajectory predict_trajectory(const TruthPlant& plant, const HillState& x0, double nu0, const ControlHistory& controls) {
  controls.validate();
  Trajectory tr;
  tr.dt = controls.dt;
  tr.x.reserve(controls.u.size() + 1);
  tr.nu.reserve(controls.u.size() + 1);
  HillState x = x0;
  double nu = nu0;
  tr.x.push_back(x);
  tr.nu.push_back(nu);
  for (std::size_t k = 0; k < controls.u.size(); ++k) {
    try {
      plant.step(x, nu, controls.u[k], controls.dt);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "prediction failed at step " << k << ": " << e.what();
      throw PropagationError(os.str());
    }
    if (!x.allFinite()) {
      std::ostringstream os;
      os << "prediction produced a non-finite state at step " << k + 1;
      throw PropagationError(os.str());
    }
    tr.x.push_back(x);
    tr.nu.push_back(nu);
  }
  return tr;
}

double rho_error_pct(const HillState& terminal, const HillState& target) {
  const double rd = position_of(target).norm();
  if (!(rd > 0.0)) throw DomainError("rho_error_pct: desired baseline length is zero");
  return std::abs(position_of(terminal).norm() - rd) / rd * 100.0;
}

double trapezoid_effort(const std::vector<Vec3>& samples, double dt) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < samples.size(); ++k)
    s += 0.5 * dt * (samples[k].squaredNorm() + samples[k + 1].squaredNorm());
  return s;
}

double control_effort(const ControlHistory& h) {
  if (h.u.empty()) return 0.0;
  std::vector<Vec3> samples = h.u;
  samples.push_back(h.u.back());
  return trapezoid_effort(samples, h.dt);
}

IterativeResult iterate_to_terminal(const TruthPlant& plant, const HillState& x0, double nu0, const HillState& target,
                                    double tol_rho_pct, int max_iter, const ControlHistory& guess,
                                    const TerminalUpdate& update) {
  if (!(tol_rho_pct > 0.0)) throw DomainError("iteration: tolerance must be positive");
  if (max_iter < 1) throw DomainError("iteration: max_iter must be >= 1");
  guess.validate();

  IterativeResult res;
  ControlHistory current = guess;
  Trajectory traj = predict_trajectory(plant, x0, nu0, current);
  double best_norm = 0.0;

  for (int it = 0;; ++it) {
    IterationLog entry;
    entry.iteration = it;
    entry.terminal_error = traj.terminal() - target;
    entry.rho_error_pct = rho_error_pct(traj.terminal(), target);
    entry.effort = control_effort(current);
    res.log.push_back(entry);

    const double norm = position_of(entry.terminal_error).norm();
    if (it == 0 || norm < best_norm) {
      best_norm = norm;
      res.controls = current;
      res.iterations = it;
    }
    if (entry.rho_error_pct < tol_rho_pct) {
      res.controls = current;
      res.iterations = it;
      res.converged = true;
      return res;
    }
    if (it == max_iter) break;
    current = update(traj, current, entry.terminal_error);
    current.validate();
    traj = predict_trajectory(plant, x0, nu0, current);
  }
  return res;
}

}  // namespace sff
