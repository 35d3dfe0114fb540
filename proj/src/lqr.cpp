#include "sff/lqr.hpp"

#include "sff/numerics.hpp"

namespace sff {

LqrDesign design_lqr(const Mat6& A, const Mat6& Q, const Mat3& R) {
  LqrDesign d;
  d.A = A;
  d.B = control_matrix();
  d.Q = Q;
  d.R = R;
  d.P = solve_are(A, d.B, Q, R);
  d.K = R.llt().solve(d.B.transpose() * d.P);
  return d;
}

LqrDesign design_lqr(double omega, const Mat6& Q, const Mat3& R) {
  return design_lqr(hill_linear_matrices(omega).A, Q, R);
}

TrackingCommand lqr_tracking_control(const LqrDesign& design, const HillState& x, const HillState& xd,
                                     const Vec6& xd_dot, const Mat6& A) {
  const Vec6 forcing = A * xd - xd_dot;
  TrackingCommand c;
  c.u = -design.K * (x - xd) - accel_rows(forcing);
  c.feedforward_residual = Vec3(forcing[kX], forcing[kY], forcing[kZ]).norm();
  return c;
}

}  // namespace sff
