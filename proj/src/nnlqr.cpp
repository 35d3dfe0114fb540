#include "sff/nnlqr.hpp"

#include "sff/numerics.hpp"

#include <cmath>

namespace sff {

void RbfNetwork::validate() const {
  if (centers.empty()) throw DomainError("rbf: need at least one basis function");
  if (!(inv_width.array() > 0.0).all() || !inv_width.allFinite()) throw DomainError("rbf: widths must be positive");
  if (Wc.rows() != size() || Wc.cols() != 6) throw DomainError("rbf: weight matrix must be (num_basis) x 6");
}

VecX RbfNetwork::basis(const HillState& x) const {
  VecX phi(size());
  for (int j = 0; j < size(); ++j) {
    const Vec6 d = (x - centers[j]).cwiseProduct(inv_width);
    phi(j) = std::exp(-0.5 * d.squaredNorm());
  }
  return phi;
}

RbfNetwork make_lattice_rbf(double rho, double omega) {
  if (!(rho > 0.0) || !(omega > 0.0)) throw DomainError("rbf lattice: rho and omega must be positive");
  RbfNetwork net;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k) {
        Vec6 c = Vec6::Zero();
        c(kX) = i * rho;
        c(kY) = j * rho;
        c(kZ) = k * rho;
        net.centers.push_back(c);
      }
  const double w = 1.0 / rho;
  net.inv_width << w, w / omega, w, w / omega, w, w / omega;
  net.Wc = MatX::Zero(net.size(), 6);
  return net;
}

Vec6 rbf_eval(const RbfNetwork& net, const HillState& x) { return net.Wc.transpose() * net.basis(x); }

void nn1_update(RbfNetwork& net, const Vec6& target, const HillState& x, double R1) {
  if (!(R1 > 0.0)) throw DomainError("nn1_update: R1 must be positive");
  const VecX phi = net.basis(x);
  const int p = net.size();
  const MatX G = phi * phi.transpose() + R1 * MatX::Identity(p, p);
  const MatX rhs = phi * target.transpose() + R1 * net.Wc;
  net.Wc = G.llt().solve(rhs);
}

namespace {

// s(psi) = psi + psi^2 + ... + psi^n and its derivative.
void psi_series(double psi, int n, double& s, double& ds) {
  s = 0.0;
  ds = 0.0;
  double pk = 1.0;
  for (int k = 1; k <= n; ++k) {
    ds += k * pk;
    pk *= psi;
    s += pk;
  }
}

}  // namespace

VecX DisturbanceBasis::eval(const HillState& x, double theta) const {
  VecX phi(size());
  const Vec6 scale(pos_scale, vel_scale, pos_scale, vel_scale, pos_scale, vel_scale);
  phi.head<6>() = x.cwiseQuotient(scale);
  const Vec3 p = position_of(x);
  const double psi = -2.0 * p(0) / r_c - p.squaredNorm() / (r_c * r_c);
  double s, ds;
  psi_series(psi, series_order, s, ds);
  // r_c / pos_scale^2 brings the series terms to order one
  const double k = r_c / (pos_scale * pos_scale);
  for (int j = 0; j < 3; ++j) phi(6 + j) = k * s * p(j);
  if (trig_terms) {
    phi(9) = 1.0;
    phi(10) = std::sin(theta);
    phi(11) = std::cos(theta);
    phi(12) = std::sin(2.0 * theta);
    phi(13) = std::cos(2.0 * theta);
  }
  return phi;
}

MatX DisturbanceBasis::jacobian(const HillState& x, double) const {
  MatX G = MatX::Zero(size(), 6);
  G(0, kX) = 1.0 / pos_scale;
  G(1, kXDot) = 1.0 / vel_scale;
  G(2, kY) = 1.0 / pos_scale;
  G(3, kYDot) = 1.0 / vel_scale;
  G(4, kZ) = 1.0 / pos_scale;
  G(5, kZDot) = 1.0 / vel_scale;
  const Vec3 p = position_of(x);
  const double psi = -2.0 * p(0) / r_c - p.squaredNorm() / (r_c * r_c);
  double s, ds;
  psi_series(psi, series_order, s, ds);
  const Vec3 dpsi = Vec3(-2.0 / r_c, 0.0, 0.0) - 2.0 * p / (r_c * r_c);
  const double k = r_c / (pos_scale * pos_scale);
  const int cols[3] = {kX, kY, kZ};
  for (int j = 0; j < 3; ++j) {
    for (int m = 0; m < 3; ++m) G(6 + j, cols[m]) = k * ds * dpsi(m) * p(j);
    G(6 + j, cols[j]) += k * s;
  }
  return G;
}

DisturbanceBasis build_disturbance_basis(const GravityModel& g, double r_c, double pos_scale, double omega) {
  if (!(r_c > 0.0)) throw DomainError("disturbance basis: r_c must be positive");
  if (!(pos_scale > 0.0) || !(omega > 0.0)) throw DomainError("disturbance basis: scales must be positive");
  DisturbanceBasis b;
  b.r_c = r_c;
  b.pos_scale = pos_scale;
  b.vel_scale = pos_scale * omega;
  b.trig_terms = g.j2_enabled;
  return b;
}

void AdaptationGains::validate() const {
  if (!(beta.array() > 0.0).all() || !(gamma.array() > 0.0).all())
    throw DomainError("adaptation gains: beta and gamma must be positive");
  if (theta_scale < 0.0) throw DomainError("adaptation gains: Theta must be positive semidefinite");
}

Vec3 DisturbanceNet::eval(const HillState& x, double theta) const { return W.transpose() * basis.eval(x, theta); }

Mat6 DisturbanceNet::jacobian(const HillState& x, double theta) const {
  const MatX G = basis.jacobian(x, theta);
  Mat6 J = Mat6::Zero();
  const MatX D = W.transpose() * G;  // 3 x 6
  J.row(kXDot) = D.row(0);
  J.row(kYDot) = D.row(1);
  J.row(kZDot) = D.row(2);
  return J;
}

void nn2_update(DisturbanceNet& net, const Vec3& e, const HillState& x, double theta, const AdaptationGains& gains,
                double dt) {
  if (!(dt > 0.0)) throw DomainError("nn2_update: dt must be positive");
  const VecX phi = net.basis.eval(x, theta);
  const MatX G = net.basis.jacobian(x, theta);
  const int p = net.basis.size();
  const MatX GG = gains.theta_scale * G * G.transpose();
  for (int i = 0; i < 3; ++i) {
    if (e(i) == 0.0) continue;
    const MatX M = MatX::Identity(p, p) / gains.gamma(i) + GG;
    net.W.col(i) += dt * gains.beta(i) * e(i) * M.llt().solve(phi);
  }
  if (!net.W.allFinite()) throw PropagationError("nn2_update: non-finite disturbance weights");
}

void VirtualPlant::validate() const {
  if (!(k_tau.array() > 0.0).all()) throw DomainError("virtual plant: K_tau entries must be positive");
}

void virtual_plant_step(VirtualPlant& vp, const HillState& x, const Vec3& u, const Vec3& dhat, const Mat6& A,
                        double dt) {
  const Mat63 B = control_matrix();
  const Vec6 drive = A * x + B * (u + dhat);
  auto f = [&](double, const Vec6& xa) -> Vec6 { return drive + vp.k_tau.cwiseProduct(x - xa); };
  vp.xa = rk4_step(f, 0.0, vp.xa, dt);
}

Vec6 costate_backprop(const Vec6& x_err, const Vec6& lambda_next, const Mat6& dDhat_dX, const Mat6& Q, const Mat6& A,
                      double dt) {
  return lambda_next + dt * (Q * x_err + (A + dDhat_dX).transpose() * lambda_next);
}

void NnLqrConfig::validate() const {
  if (!(R1 > 0.0)) throw DomainError("nnlqr: R1 must be positive");
  if (!(k_tau > 0.0)) throw DomainError("nnlqr: k_tau must be positive");
  gains.validate();
}

NnLqrController::NnLqrController(const LqrDesign& design, const NnLqrConfig& config, const DisturbanceBasis& basis,
                                 const RbfNetwork& costate_net, const HillState& x0)
    : design_(design), config_(config), dnet_(basis), cnet_(costate_net) {
  config_.validate();
  cnet_.validate();
  vp_.xa = x0;
  vp_.k_tau = Vec6::Constant(config_.k_tau);
}

Vec3 NnLqrController::step(double t, const HillState& x, const HillState& xd, const Vec6& xd_dot,
                           const HillState& xd_next, double theta, double dt) {
  const Mat6& A = design_.A;
  const Mat63 B = control_matrix();
  const Mat3 Rinv = design_.R.inverse();
  const Vec3 ff = -accel_rows(A * xd - xd_dot);
  if (!config_.enabled) return -design_.K * (x - xd) + ff;

  // 1. costates at the current state
  const Vec6 lam1 = design_.P * (x - xd);
  const Vec6 lam2 = config_.costate_net ? rbf_eval(cnet_, x) : Vec6::Zero();
  const Vec3 dhat = dnet_.eval(x, theta);
  const Vec3 u = -Rinv * B.transpose() * (lam1 + lam2) + ff - dhat;

  // 2. disturbance identification on the virtual-plant error
  const Vec6 E = x - vp_.xa;
  nn2_update(dnet_, accel_rows(E), x, theta, config_.gains, dt);

  // 3. virtual plant
  virtual_plant_step(vp_, x, u, dhat, A, dt);

  if (config_.costate_net) {
    // 4. costate at the predicted state
    const Vec6 lam_next = design_.P * (vp_.xa - xd_next) + rbf_eval(cnet_, vp_.xa);
    // 5. one step back
    const Vec6 lam_t = costate_backprop(x - xd, lam_next, dnet_.jacobian(x, theta), design_.Q, A, dt);
    // 6. train NN1 on the residual costate
    nn1_update(cnet_, lam_t - lam1, x, config_.R1);
  }

  NnStepLog entry;
  entry.t = t;
  entry.E = E;
  entry.dhat = dhat;
  entry.w_norm = dnet_.W.norm();
  entry.wc_norm = cnet_.Wc.norm();
  log_.push_back(entry);
  w_hist_.push_back(dnet_.W);
  return u;
}

}  // namespace sff
