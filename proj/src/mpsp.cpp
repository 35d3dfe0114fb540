#include "sff/mpsp.hpp"

#include "sff/numerics.hpp"

#include <sstream>

namespace sff {

void MpspConfig::validate() const {
  if (!(tol_rho_pct > 0.0)) throw DomainError("mpsp: tolerance must be positive");
  if (max_iter < 1) throw DomainError("mpsp: max_iter must be >= 1");
  if (R_l.llt().info() != Eigen::Success) throw DomainError("mpsp: R_l must be positive definite");
}

Mat6 plant_jacobian(const TruthPlant& plant, const HillState& x, double nu) {
  const ChiefKinematics kin = plant.kinematics(nu);
  Mat6 J = cw_jacobian(x, kin, plant.gravity.mu);
  if (plant.gravity.j2_enabled) {
    auto accel = [&](const VecX& s) -> VecX {
      return j2_differential_accel(plant.gravity, plant.chief, kin, HillState(s));
    };
    const MatX Jj2 = fd_jacobian(accel, VecX(x), 1e-6);
    J.row(kXDot) += Jj2.row(0);
    J.row(kYDot) += Jj2.row(1);
    J.row(kZDot) += Jj2.row(2);
  }
  return J;
}

StepJacobians analytic_state_jacobians(const TruthPlant& plant, const Trajectory& traj) {
  StepJacobians jac;
  const std::size_t n = traj.x.size() - 1;
  jac.dFdX.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    jac.dFdX[k] = Mat6::Identity() + traj.dt * plant_jacobian(plant, traj.x[k], traj.nu[k]);
  jac.dFdU = traj.dt * control_matrix();
  return jac;
}

SensitivitySet compute_sensitivities(const StepJacobians& jac, const Mat3& Rk, const ControlHistory& U0) {
  const std::size_t n = jac.dFdX.size();
  if (U0.u.size() != n) throw DomainError("compute_sensitivities: control history and Jacobians differ in length");
  const Mat3 Rinv = Rk.inverse();
  SensitivitySet s;
  s.Bk.resize(n);
  s.A_lambda.setZero();
  s.b_lambda.setZero();
  Mat6 phi = Mat6::Identity();
  for (std::size_t j = n; j-- > 0;) {
    s.Bk[j] = phi * jac.dFdU;
    phi = phi * jac.dFdX[j];
    s.A_lambda -= s.Bk[j] * Rinv * s.Bk[j].transpose();
    s.b_lambda += s.Bk[j] * U0.u[j];
  }
  s.A_lambda = 0.5 * (s.A_lambda + s.A_lambda.transpose());
  return s;
}

ControlHistory mpsp_update(const SensitivitySet& sens, const Vec6& dY, const ControlHistory& U0, const Mat3& Rk) {
  Eigen::FullPivLU<Mat6> lu(sens.A_lambda);
  if (!lu.isInvertible() || lu.rcond() < 1e-15) {
    std::ostringstream os;
    os << "mpsp_update: A_lambda is singular (rcond " << lu.rcond()
       << "); use more grid points or a smaller control weight";
    throw SolverError(os.str());
  }
  const Vec6 nu = lu.solve(dY - sens.b_lambda);
  const Mat3 Rinv = Rk.inverse();
  ControlHistory out;
  out.dt = U0.dt;
  out.u.resize(sens.Bk.size());
  for (std::size_t k = 0; k < sens.Bk.size(); ++k) out.u[k] = Rinv * sens.Bk[k].transpose() * nu;
  return out;
}

IterativeResult mpsp_solve(const TruthPlant& plant, const HillState& x0, double nu0, const HillState& target,
                           const MpspConfig& config, const ControlHistory& guess) {
  config.validate();
  const Mat3 Rk = guess.dt * config.R_l;
  auto update = [&](const Trajectory& traj, const ControlHistory& current, const Vec6& dY) {
    const SensitivitySet sens = compute_sensitivities(analytic_state_jacobians(plant, traj), Rk, current);
    return mpsp_update(sens, dY, current, Rk);
  };
  return iterate_to_terminal(plant, x0, nu0, target, config.tol_rho_pct, config.max_iter, guess, update);
}

}  // namespace sff
