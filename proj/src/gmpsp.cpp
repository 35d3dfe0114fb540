#include "sff/gmpsp.hpp"

#include <sstream>

namespace sff {

void GmpspConfig::validate() const {
  if (!(tol_rho_pct > 0.0)) throw DomainError("gmpsp: tolerance must be positive");
  if (max_iter < 1) throw DomainError("gmpsp: max_iter must be >= 1");
  if (R.llt().info() != Eigen::Success) throw DomainError("gmpsp: R must be positive definite");
}

SensitivityField integrate_W_backward(const std::vector<Mat6>& J_grid, const std::vector<Mat6>& J_mid, double dt) {
  if (J_grid.size() < 2 || J_mid.size() + 1 != J_grid.size())
    throw DomainError("integrate_W_backward: need N grid Jacobians and N - 1 midpoint Jacobians");
  if (!(dt > 0.0)) throw DomainError("integrate_W_backward: dt must be positive");
  const std::size_t n = J_grid.size();
  SensitivityField f;
  f.dt = dt;
  f.W.resize(n);
  f.Bc.resize(n);
  const Mat63 B = control_matrix();
  Mat6 W = Mat6::Identity();
  f.W[n - 1] = W;
  f.Bc[n - 1] = W * B;
  // Backward in time: dW/ds = W J(tf - s).
  for (std::size_t k = n - 1; k-- > 0;) {
    const Mat6 k1 = W * J_grid[k + 1];
    const Mat6 k2 = (W + 0.5 * dt * k1) * J_mid[k];
    const Mat6 k3 = (W + 0.5 * dt * k2) * J_mid[k];
    const Mat6 k4 = (W + dt * k3) * J_grid[k];
    W += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!W.allFinite()) {
      std::ostringstream os;
      os << "integrate_W_backward: non-finite sensitivity at t = " << k * dt;
      throw PropagationError(os.str());
    }
    f.W[k] = W;
    f.Bc[k] = W * B;
  }
  return f;
}

SensitivityField integrate_W_backward(const TruthPlant& plant, const Trajectory& traj, const ControlHistory& controls) {
  const std::size_t n = traj.x.size();
  if (controls.u.size() + 1 != n) throw DomainError("integrate_W_backward: trajectory and controls differ in length");
  const double dt = traj.dt;
  std::vector<Mat6> J_grid(n), J_mid(n - 1);
  for (std::size_t k = 0; k < n; ++k) J_grid[k] = plant_jacobian(plant, traj.x[k], traj.nu[k]);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec6 f0 = plant.deriv(traj.x[k], traj.nu[k], controls.u[k]);
    const Vec6 f1 = plant.deriv(traj.x[k + 1], traj.nu[k + 1], controls.u[k]);
    const HillState xm = 0.5 * (traj.x[k] + traj.x[k + 1]) + (dt / 8.0) * (f0 - f1);
    const double num = nu_step(plant.chief, traj.nu[k], 0.5 * dt, plant.gravity.mu);
    J_mid[k] = plant_jacobian(plant, xm, num);
  }
  return integrate_W_backward(J_grid, J_mid, dt);
}

GmpspAccumulators gmpsp_accumulate(const SensitivityField& field, const ControlHistory& U0, const Mat3& R) {
  const std::size_t n = field.Bc.size();
  if (U0.u.size() + 1 != n) throw DomainError("gmpsp_accumulate: field and control history differ in length");
  const Mat3 Rinv = R.inverse();
  GmpspAccumulators acc;
  acc.A_lambda.setZero();
  acc.b_lambda.setZero();
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 * field.dt : field.dt;
    const Vec3& u = k < U0.u.size() ? U0.u[k] : U0.u.back();
    acc.A_lambda += w * field.Bc[k] * Rinv * field.Bc[k].transpose();
    acc.b_lambda += w * field.Bc[k] * u;
  }
  acc.A_lambda = 0.5 * (acc.A_lambda + acc.A_lambda.transpose());
  return acc;
}

ControlHistory gmpsp_update(const GmpspAccumulators& acc, const Vec6& dY, const SensitivityField& field,
                            const Mat3& R) {
  Eigen::LLT<Mat6> llt(acc.A_lambda);
  if (llt.info() != Eigen::Success) throw SolverError("gmpsp_update: A_lambda is not positive definite");
  const Vec6 nu = llt.solve(dY - acc.b_lambda);
  const Mat3 Rinv = R.inverse();
  ControlHistory out;
  out.dt = field.dt;
  out.u.resize(field.Bc.size() - 1);
  for (std::size_t k = 0; k < out.u.size(); ++k) out.u[k] = -Rinv * field.Bc[k].transpose() * nu;
  return out;
}

IterativeResult gmpsp_solve(const TruthPlant& plant, const HillState& x0, double nu0, const HillState& target,
                            const GmpspConfig& config, const ControlHistory& guess) {
  config.validate();
  auto update = [&](const Trajectory& traj, const ControlHistory& current, const Vec6& dY) {
    const SensitivityField field = integrate_W_backward(plant, traj, current);
    return gmpsp_update(gmpsp_accumulate(field, current, config.R), dY, field, config.R);
  };
  return iterate_to_terminal(plant, x0, nu0, target, config.tol_rho_pct, config.max_iter, guess, update);
}

}  // namespace sff
