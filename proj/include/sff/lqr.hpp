#pragma once

#include "sff/dynamics.hpp"

namespace sff {

struct LqrDesign {
  Mat6 A;
  Mat63 B;
  Mat6 Q;
  Mat3 R;
  Mat6 P;
  Mat36 K;  // R^-1 B' P
};

LqrDesign design_lqr(double omega, const Mat6& Q, const Mat3& R);
// Same design on an arbitrary 6-state model with the standard input matrix.
LqrDesign design_lqr(const Mat6& A, const Mat6& Q, const Mat3& R);

struct TrackingCommand {
  Vec3 u;
  // Size of A*Xd - Xd_dot on the kinematic rows, which the feedforward
  // cannot cancel. Nonzero means the desired path is not consistent with A.
  double feedforward_residual = 0.0;
};

// U = -K (X - Xd) - rows{2,4,6}(A Xd - Xd_dot)
TrackingCommand lqr_tracking_control(const LqrDesign& design, const HillState& x, const HillState& xd,
                                     const Vec6& xd_dot, const Mat6& A);

}  // namespace sff
