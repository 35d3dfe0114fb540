#pragma once

#include "sff/dynamics.hpp"

namespace sff {

enum class SdcVariant { Sdc1, Sdc2 };

struct SdcModel {
  SdcVariant variant = SdcVariant::Sdc1;
  int series_order = 4;  // psi-series terms kept by SDC1

  Mat6 matrix(const HillState& x, const ChiefKinematics& kin, double mu = kMuEarth) const;
};

// Gravity term written through the binomial series of (1 - xi)^(-3/2),
// xi = -2x/r_c - |rho|^2 / r_c^2. Throws DomainError when |xi| >= 1.
Mat6 sdc1_matrix(const HillState& x, const ChiefKinematics& kin, int order, double mu = kMuEarth);

// Circular-orbit factorization through sigma_x, sigma_y, sigma_z; uses the
// instantaneous nu_dot in place of the mean motion and drops nu_ddot.
Mat6 sdc2_matrix(const HillState& x, const ChiefKinematics& kin);

// Coefficients used by sdc2_matrix, exposed for tests.
struct Sdc2Sigmas {
  double sx, sy, sz;
};
Sdc2Sigmas sdc2_sigmas(const HillState& x, double r_c);

// U = -R^-1 B' P(X) (X - Xd), P(X) from the ARE frozen at the current state.
Vec3 sdre_infinite_control(const HillState& x, const HillState& xd, const SdcModel& model,
                           const ChiefKinematics& kin, const Mat6& Q, const Mat3& R, double mu = kMuEarth);

// State-dependent gain K(X) = R^-1 B' P(X).
Mat36 sdre_gain(const HillState& x, const SdcModel& model, const ChiefKinematics& kin, const Mat6& Q,
                const Mat3& R, double mu = kMuEarth);

// U = -K_P (X - X*) - K_I * integral(X - X*) dt. The integral is owned by the caller.
Vec3 sdre_integral_control(const HillState& x, const HillState& xd, const Vec6& accumulated_error, const Mat36& K_P,
                           const Mat36& K_I);

struct FiniteHorizonSpec {
  double tf = 0.0;
  HillState xf = HillState::Zero();
  Mat6 Q = Mat6::Zero();
  Mat3 R = Mat3::Identity() * 1e9;
};

// [[A, -B R^-1 B'], [-Q, -A']]
Mat12 hamiltonian_matrix(const Mat6& A, const Mat6& Q, const Mat3& R);

// Hard terminal constraint solved from the current state each call:
// phi = exp(H (tf - t)), lambda = phi12^-1 (Xf - phi11 X), U = -R^-1 B' lambda.
Vec3 finite_time_sdre_control(const HillState& x, double t, const FiniteHorizonSpec& spec, const SdcModel& model,
                              const ChiefKinematics& kin, double mu = kMuEarth);

// How lambda(t) is obtained after the boundary problem fixes lambda(t0):
//  Receding  - the boundary problem is re-solved from the current state at every step.
//  Anchored  - lambda(t) = phi21(t, t0) X(t0) + phi22(t, t0) lambda(t0), phi from the current A(X).
//  Stepwise  - lambda carried interval by interval with the one-step transition
//              matrix of the current A(X), using the measured state.
enum class FiniteSdreScheme { Receding, Anchored, Stepwise };

class FiniteTimeSdre {
 public:
  FiniteTimeSdre(const FiniteHorizonSpec& spec, const SdcModel& model, FiniteSdreScheme scheme,
                 double mu = kMuEarth);

  // Calls must come in increasing t on a uniform grid.
  Vec3 control(const HillState& x, double t, const ChiefKinematics& kin);

 private:
  FiniteHorizonSpec spec_;
  SdcModel model_;
  FiniteSdreScheme scheme_;
  double mu_;
  bool started_ = false;
  double t0_ = 0.0;
  HillState x0_ = HillState::Zero();
  Vec6 lambda0_ = Vec6::Zero();
  // Stepwise: state and costate at the previous call
  double t_prev_ = 0.0;
  HillState x_prev_ = HillState::Zero();
  Vec6 lambda_prev_ = Vec6::Zero();
  Mat6 A_prev_ = Mat6::Zero();
};

}  // namespace sff
