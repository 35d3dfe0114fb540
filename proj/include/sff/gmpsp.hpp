#pragma once

#include "sff/control.hpp"
#include "sff/mpsp.hpp"

#include <vector>

namespace sff {

struct SensitivityField {
  double dt = 1.0;
  std::vector<Mat6> W;    // at every grid point, W.back() = I
  std::vector<Mat63> Bc;  // W(t) * df/dU
};

// Backward RK4 of W' = -W J(t) from W(tf) = I. J_grid holds df/dX at the N
// grid points, J_mid at the N - 1 interval midpoints.
SensitivityField integrate_W_backward(const std::vector<Mat6>& J_grid, const std::vector<Mat6>& J_mid, double dt);

// Same, with the Jacobians taken along a predicted truth trajectory.
// Midpoint states come from the cubic Hermite through each interval's ends.
SensitivityField integrate_W_backward(const TruthPlant& plant, const Trajectory& traj, const ControlHistory& controls);

struct GmpspAccumulators {
  Mat6 A_lambda;  // integral of Bc R^-1 Bc'
  Vec6 b_lambda;  // integral of Bc U0
};

// Trapezoidal quadrature on the grid; U0 at the final grid point holds the last control.
GmpspAccumulators gmpsp_accumulate(const SensitivityField& field, const ControlHistory& U0, const Mat3& R);

// U(t_k) = -R^-1 Bc(t_k)' A_lambda^-1 (dY - b_lambda)
ControlHistory gmpsp_update(const GmpspAccumulators& acc, const Vec6& dY, const SensitivityField& field,
                            const Mat3& R);

struct GmpspConfig {
  Mat3 R = Mat3::Identity() * 1e9;
  double tol_rho_pct = 1.0;
  int max_iter = 10;

  void validate() const;
  friend bool operator==(const GmpspConfig&, const GmpspConfig&) = default;
};

IterativeResult gmpsp_solve(const TruthPlant& plant, const HillState& x0, double nu0, const HillState& target,
                            const GmpspConfig& config, const ControlHistory& guess);

}  // namespace sff
