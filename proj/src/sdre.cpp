#include "sff/sdre.hpp"

#include "sff/numerics.hpp"

#include <cmath>
#include <sstream>

namespace sff {

Mat6 SdcModel::matrix(const HillState& x, const ChiefKinematics& kin, double mu) const {
  return variant == SdcVariant::Sdc1 ? sdc1_matrix(x, kin, series_order, mu) : sdc2_matrix(x, kin);
}

Mat6 sdc1_matrix(const HillState& x, const ChiefKinematics& kin, int order, double mu) {
  if (order < 1) throw DomainError("sdc1_matrix: series order must be >= 1");
  const double rc = kin.r_c;
  const double px = x[kX], py = x[kY], pz = x[kZ];
  const double rho2 = px * px + py * py + pz * pz;
  const double xi = -2.0 * px / rc - rho2 / (rc * rc);
  if (!(std::abs(xi) < 1.0)) {
    std::ostringstream os;
    os << "sdc1_matrix: series diverges (|xi| = " << std::abs(xi) << " >= 1) at rho = " << std::sqrt(rho2)
       << " km, r_c = " << rc << " km";
    throw DomainError(os.str());
  }
  // (1 - xi)^(-3/2) = 1 + (3/2) psi xi
  double psi = 1.0, term = 1.0;
  for (int k = 1; k <= order; ++k) {
    term *= xi * (1.5 + k) / (k + 1.0);
    psi += term;
  }
  const double rx = rc + px;
  const double d2 = rx * rx + py * py + pz * pz;
  const double g = mu / (d2 * std::sqrt(d2));
  const double nd = kin.nu_dot, ndd = kin.nu_ddot;
  const double c3 = 1.5 * mu / (rc * rc * rc);
  const double c4 = c3 / rc;

  Mat6 A = Mat6::Zero();
  A(kX, kXDot) = 1.0;
  A(kY, kYDot) = 1.0;
  A(kZ, kZDot) = 1.0;
  A(kXDot, kX) = nd * nd - g + c3 * (2.0 + px / rc) * psi;
  A(kXDot, kY) = ndd + c4 * psi * py;
  A(kXDot, kYDot) = 2.0 * nd;
  A(kXDot, kZ) = c4 * psi * pz;
  A(kYDot, kX) = -ndd;
  A(kYDot, kXDot) = -2.0 * nd;
  A(kYDot, kY) = nd * nd - g;
  A(kZDot, kZ) = -g;
  return A;
}

Sdc2Sigmas sdc2_sigmas(const HillState& x, double rc) {
  const double px = x[kX], py = x[kY], pz = x[kZ];
  if (!(rc + px > 0.0)) throw DomainError("sdc2_matrix: requires r_c + x > 0");
  const double s = (2.0 * rc * px + px * px + py * py + pz * pz) / (rc * rc);
  // 1 - (1 + s)^(-3/2) without cancellation for small s
  const double sy = -std::expm1(-1.5 * std::log1p(s));
  Sdc2Sigmas out;
  out.sy = sy;
  out.sz = 1.0 - sy;
  if (px == 0.0) {
    // sigma_x multiplies x = 0, so any finite value factorizes; take the
    // on-axis limit (r_c + x) d(sigma_y)/dx. sigma_y is accurate for tiny s,
    // so no other cutoff is needed.
    const double dsy = 1.5 * std::pow(1.0 + s, -2.5) * 2.0 * (rc + px) / (rc * rc);
    out.sx = (rc + px) * dsy;
  } else {
    out.sx = (rc / px + 1.0) * sy;
  }
  return out;
}

Mat6 sdc2_matrix(const HillState& x, const ChiefKinematics& kin) {
  const Sdc2Sigmas sg = sdc2_sigmas(x, kin.r_c);
  const double nd = kin.nu_dot, w2 = nd * nd;
  Mat6 A = Mat6::Zero();
  A(kX, kXDot) = 1.0;
  A(kY, kYDot) = 1.0;
  A(kZ, kZDot) = 1.0;
  A(kXDot, kX) = w2 * sg.sx;
  A(kXDot, kYDot) = 2.0 * nd;
  A(kYDot, kXDot) = -2.0 * nd;
  A(kYDot, kY) = w2 * sg.sy;
  A(kZDot, kZ) = -w2 * sg.sz;
  return A;
}

Mat36 sdre_gain(const HillState& x, const SdcModel& model, const ChiefKinematics& kin, const Mat6& Q, const Mat3& R,
                double mu) {
  const Mat6 A = model.matrix(x, kin, mu);
  const Mat63 B = control_matrix();
  MatX P;
  try {
    P = solve_are(A, B, Q, R);
  } catch (const SolverError& e) {
    std::ostringstream os;
    os << "sdre: ARE failed at state [" << x.transpose() << "]: " << e.what();
    throw SolverError(os.str());
  }
  return R.llt().solve(B.transpose() * P);
}

Vec3 sdre_infinite_control(const HillState& x, const HillState& xd, const SdcModel& model,
                           const ChiefKinematics& kin, const Mat6& Q, const Mat3& R, double mu) {
  return -sdre_gain(x, model, kin, Q, R, mu) * (x - xd);
}

Vec3 sdre_integral_control(const HillState& x, const HillState& xd, const Vec6& accumulated_error, const Mat36& K_P,
                           const Mat36& K_I) {
  return -K_P * (x - xd) - K_I * accumulated_error;
}

Mat12 hamiltonian_matrix(const Mat6& A, const Mat6& Q, const Mat3& R) {
  const Mat63 B = control_matrix();
  Mat12 H;
  H << A, -B * R.llt().solve(B.transpose()), -Q, -A.transpose();
  return H;
}

namespace {
void check_phi12(const Mat6& phi12) {
  Eigen::JacobiSVD<Mat6> svd(phi12);
  const auto& sv = svd.singularValues();
  const double cond = sv[0] / sv[5];
  if (!(cond <= 1e12)) {
    std::ostringstream os;
    os << "finite-time SDRE: phi12 is ill-conditioned (cond = " << cond
       << "); the remaining horizon is too short or too long for the hard constraint";
    throw SolverError(os.str());
  }
}
}  // namespace

Vec3 finite_time_sdre_control(const HillState& x, double t, const FiniteHorizonSpec& spec, const SdcModel& model,
                              const ChiefKinematics& kin, double mu) {
  if (!(spec.tf > t)) throw DomainError("finite_time_sdre_control: tf must exceed the current time");
  const Mat12 H = hamiltonian_matrix(model.matrix(x, kin, mu), spec.Q, spec.R);
  const Mat12 phi = matrix_exponential(H, spec.tf - t);
  const Mat6 phi11 = phi.topLeftCorner<6, 6>();
  const Mat6 phi12 = phi.topRightCorner<6, 6>();
  check_phi12(phi12);
  const Vec6 lambda = phi12.partialPivLu().solve(spec.xf - phi11 * x);
  return -spec.R.llt().solve(control_matrix().transpose() * lambda);
}

FiniteTimeSdre::FiniteTimeSdre(const FiniteHorizonSpec& spec, const SdcModel& model, FiniteSdreScheme scheme,
                               double mu)
    : spec_(spec), model_(model), scheme_(scheme), mu_(mu) {}

Vec3 FiniteTimeSdre::control(const HillState& x, double t, const ChiefKinematics& kin) {
  if (scheme_ == FiniteSdreScheme::Receding) return finite_time_sdre_control(x, t, spec_, model_, kin, mu_);
  const Mat6 A = model_.matrix(x, kin, mu_);
  Vec6 lambda;
  if (!started_) {
    if (!(spec_.tf > t)) throw DomainError("finite-time SDRE: tf must exceed the start time");
    const Mat12 phi = matrix_exponential(hamiltonian_matrix(A, spec_.Q, spec_.R), spec_.tf - t);
    const Mat6 phi12 = phi.topRightCorner<6, 6>();
    check_phi12(phi12);
    lambda0_ = phi12.partialPivLu().solve(spec_.xf - phi.topLeftCorner<6, 6>() * x);
    x0_ = x;
    t0_ = t;
    started_ = true;
    lambda = lambda0_;
  } else if (scheme_ == FiniteSdreScheme::Anchored) {
    const Mat12 phi = matrix_exponential(hamiltonian_matrix(A, spec_.Q, spec_.R), t - t0_);
    lambda = phi.bottomLeftCorner<6, 6>() * x0_ + phi.bottomRightCorner<6, 6>() * lambda0_;
  } else {
    const Mat12 phi = matrix_exponential(hamiltonian_matrix(A_prev_, spec_.Q, spec_.R), t - t_prev_);
    lambda = phi.bottomLeftCorner<6, 6>() * x_prev_ + phi.bottomRightCorner<6, 6>() * lambda_prev_;
  }
  t_prev_ = t;
  x_prev_ = x;
  lambda_prev_ = lambda;
  A_prev_ = A;
  return -spec_.R.llt().solve(control_matrix().transpose() * lambda);
}

}  // namespace sff
