#pragma once

#include "sff/control.hpp"

#include <vector>

namespace sff {

// Partial derivatives of the Euler-discretized step X_{k+1} = X_k + dt f(X_k, U_k).
struct StepJacobians {
  std::vector<Mat6> dFdX;  // one per control interval
  Mat63 dFdU;
};

// d f / d X on the truth plant: analytic relative-motion part plus a
// central-difference J2 part when J2 is enabled.
Mat6 plant_jacobian(const TruthPlant& plant, const HillState& x, double nu);

StepJacobians analytic_state_jacobians(const TruthPlant& plant, const Trajectory& traj);

struct SensitivitySet {
  std::vector<Mat63> Bk;
  Mat6 A_lambda;  // -sum B_k R_k^-1 B_k'
  Vec6 b_lambda;  // sum B_k U0_k
};

// Backward recursion from dY/dX_N = I.
SensitivitySet compute_sensitivities(const StepJacobians& jac, const Mat3& Rk, const ControlHistory& U0);

// U_k = R_k^-1 B_k' A_lambda^-1 (dY_N - b_lambda)
ControlHistory mpsp_update(const SensitivitySet& sens, const Vec6& dY, const ControlHistory& U0, const Mat3& Rk);

struct MpspConfig {
  Mat3 R_l = Mat3::Identity() * 1e9;  // R_k = dt * R_l
  double tol_rho_pct = 0.5;
  int max_iter = 10;

  void validate() const;
  friend bool operator==(const MpspConfig&, const MpspConfig&) = default;
};

IterativeResult mpsp_solve(const TruthPlant& plant, const HillState& x0, double nu0, const HillState& target,
                           const MpspConfig& config, const ControlHistory& guess);

}  // namespace sff
