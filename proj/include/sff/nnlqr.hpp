#pragma once

#include "sff/lqr.hpp"

#include <vector>

namespace sff {

// Gaussian RBF network producing an additive costate lambda2 = Wc' phi(X).
struct RbfNetwork {
  std::vector<Vec6> centers;
  Vec6 inv_width = Vec6::Ones();  // per-coordinate 1 / width
  MatX Wc;                        // (num_basis) x 6

  int size() const { return static_cast<int>(centers.size()); }
  VecX basis(const HillState& x) const;
  void validate() const;
};

// 3 x 3 x 3 lattice over position with spacing rho; velocities scaled by 1/omega.
RbfNetwork make_lattice_rbf(double rho, double omega);

Vec6 rbf_eval(const RbfNetwork& net, const HillState& x);

// Regularized least-squares step toward the target:
// Wc = (phi phi' + R1 I)^-1 (phi target' + R1 Wp), Wp the current weights.
void nn1_update(RbfNetwork& net, const Vec6& target, const HillState& x, double R1);

// Basis shared by the three disturbance channels: scaled state, the psi
// power series times each position coordinate, and trigonometric terms in
// the chief argument of latitude for J2.
struct DisturbanceBasis {
  double r_c = 10000.0;
  double pos_scale = 1.0;  // km
  double vel_scale = 1.0;  // km/s
  int series_order = 4;
  bool trig_terms = true;

  int size() const { return 9 + (trig_terms ? 5 : 0); }
  VecX eval(const HillState& x, double theta) const;
  MatX jacobian(const HillState& x, double theta) const;  // size() x 6
};

DisturbanceBasis build_disturbance_basis(const GravityModel& g, double r_c, double pos_scale, double omega);

struct AdaptationGains {
  Vec3 beta = Vec3::Constant(1.0);
  Vec3 gamma = Vec3::Constant(1e-3);
  double theta_scale = 0.0;  // Theta_i = theta_scale * I

  void validate() const;
  friend bool operator==(const AdaptationGains&, const AdaptationGains&) = default;
};

struct DisturbanceNet {
  DisturbanceBasis basis;
  MatX W;  // size() x 3, one column per acceleration channel

  explicit DisturbanceNet(const DisturbanceBasis& b) : basis(b), W(MatX::Zero(b.size(), 3)) {}
  Vec3 eval(const HillState& x, double theta) const;
  // d(dhat)/dX placed in the acceleration rows of a 6 x 6 matrix.
  Mat6 jacobian(const HillState& x, double theta) const;
};

// W_i += dt * beta_i e_i (I/gamma_i + G Theta G')^-1 Phi, G = dPhi/dX.
void nn2_update(DisturbanceNet& net, const Vec3& e, const HillState& x, double theta, const AdaptationGains& gains,
                double dt);

struct VirtualPlant {
  HillState xa = HillState::Zero();
  Vec6 k_tau = Vec6::Constant(0.1);

  void validate() const;
};

// RK4 of Xa' = A X + B U + dhat + K_tau (X - Xa) with X, U, dhat held.
void virtual_plant_step(VirtualPlant& vp, const HillState& x, const Vec3& u, const Vec3& dhat, const Mat6& A,
                        double dt);

// lambda_t = lambda_next + dt (Q x_err + (A + dDhat/dX)' lambda_next)
Vec6 costate_backprop(const Vec6& x_err, const Vec6& lambda_next, const Mat6& dDhat_dX, const Mat6& Q, const Mat6& A,
                      double dt);

struct NnLqrConfig {
  bool enabled = true;      // false: plain LQR tracking
  bool costate_net = true;  // NN1
  double R1 = 1e4;
  AdaptationGains gains;
  double k_tau = 0.03;
  bool trig_terms = true;

  void validate() const;
  friend bool operator==(const NnLqrConfig&, const NnLqrConfig&) = default;
};

struct NnStepLog {
  double t = 0.0;
  Vec6 E = Vec6::Zero();
  Vec3 dhat = Vec3::Zero();
  double w_norm = 0.0;
  double wc_norm = 0.0;
};

// Six-step online loop around a fixed LQR design.
class NnLqrController {
 public:
  NnLqrController(const LqrDesign& design, const NnLqrConfig& config, const DisturbanceBasis& basis,
                  const RbfNetwork& costate_net, const HillState& x0);

  // theta: chief argument of latitude as believed by the controller.
  Vec3 step(double t, const HillState& x, const HillState& xd, const Vec6& xd_dot, const HillState& xd_next,
            double theta, double dt);

  const DisturbanceNet& disturbance_net() const { return dnet_; }
  const RbfNetwork& costate_net() const { return cnet_; }
  const VirtualPlant& virtual_plant() const { return vp_; }
  const std::vector<NnStepLog>& log() const { return log_; }
  // Disturbance weights recorded after every step.
  const std::vector<MatX>& weight_history() const { return w_hist_; }

 private:
  LqrDesign design_;
  NnLqrConfig config_;
  DisturbanceNet dnet_;
  RbfNetwork cnet_;
  VirtualPlant vp_;
  std::vector<NnStepLog> log_;
  std::vector<MatX> w_hist_;
};

}  // namespace sff
