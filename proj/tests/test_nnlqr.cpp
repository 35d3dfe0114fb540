#include "helpers.hpp"

#include "sff/nnlqr.hpp"
#include "sff/numerics.hpp"

using namespace sff;
using namespace testing;

namespace {

const double kW = std::sqrt(kMuEarth / 1e12);

DisturbanceBasis basis(bool trig) {
  GravityModel g;
  g.j2_enabled = trig;
  return build_disturbance_basis(g, 10000.0, 5.0, kW);
}

}  // namespace

TEST_CASE("rbf lattice and basis values") {
  const RbfNetwork net = make_lattice_rbf(2.0, kW);
  CHECK(net.size() == 27);
  CHECK(net.Wc.rows() == 27);
  CHECK(net.Wc.cols() == 6);
  const VecX phi0 = net.basis(HillState::Zero());
  CHECK(phi0(13) == 1.0);  // centre of the lattice
  // neighbours one spacing away along a single axis
  CHECK(phi0(4) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(phi0(0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-14));
  HillState v = HillState::Zero();
  v(kYDot) = 2.0 * kW;  // one width in velocity
  CHECK(net.basis(v)(13) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(rbf_eval(net, v).norm() == 0.0);
  CHECK_THROWS_AS(make_lattice_rbf(0.0, kW), DomainError);
}

TEST_CASE("nn1 update limits and fixed point") {
  RbfNetwork net = make_lattice_rbf(1.0, kW);
  HillState x = HillState::Zero();
  x(kX) = 0.3;
  x(kZ) = -0.2;
  Vec6 target;
  target << 1, -2, 3, -4, 5, -6;
  const VecX phi = net.basis(x);
  const double p2 = phi.squaredNorm();

  // from zero weights the output moves a fraction |phi|^2 / (|phi|^2 + R1) of the way
  for (double R1 : {1e-10, 0.5, 1e4}) {
    RbfNetwork n = net;
    nn1_update(n, target, x, R1);
    CHECK(rel_err(rbf_eval(n, x), Vec6(target * p2 / (p2 + R1))) < 1e-9);
  }
  // weights that already reproduce the target are kept
  RbfNetwork fit = net;
  nn1_update(fit, target, x, 1e-12);
  const MatX before = fit.Wc;
  nn1_update(fit, rbf_eval(fit, x), x, 3.0);
  CHECK((fit.Wc - before).norm() <= 1e-10 * before.norm());
  CHECK_THROWS_AS(nn1_update(fit, target, x, 0.0), DomainError);
}

TEST_CASE("disturbance basis values") {
  const DisturbanceBasis b = basis(true);
  CHECK(b.size() == 14);
  CHECK(basis(false).size() == 9);
  CHECK(b.vel_scale == doctest::Approx(5.0 * kW));
  const VecX z = b.eval(HillState::Zero(), 0.4);
  CHECK(z.head<9>().norm() == 0.0);
  CHECK(z(9) == 1.0);
  CHECK(z(10) == doctest::Approx(std::sin(0.4)));
  CHECK(z(13) == doctest::Approx(std::cos(0.8)));
  // series block: psi = -2x/r_c for a pure radial offset, leading term psi * x * r_c / s^2
  HillState x = HillState::Zero();
  x(kX) = 5.0;
  const double psi = -2.0 * 5.0 / 10000.0 - 25.0 / 1e8;
  double s = 0.0;
  for (int k = 1; k <= 4; ++k) s += std::pow(psi, k);
  CHECK(b.eval(x, 0.0)(6) == doctest::Approx(10000.0 / 25.0 * s * 5.0).epsilon(1e-12));
  CHECK(b.eval(x, 0.0)(0) == doctest::Approx(1.0));
}

TEST_CASE("disturbance basis jacobian matches finite differences") {
  const DisturbanceBasis b = basis(true);
  for (int trial = 0; trial < 50; ++trial) {
    HillState x;
    x << uniform(-20, 20), uniform(-0.02, 0.02), uniform(-20, 20), uniform(-0.02, 0.02), uniform(-20, 20),
        uniform(-0.02, 0.02);
    const double th = uniform(0, 6);
    const MatX fd = fd_jacobian([&](const VecX& s) { return b.eval(s, th); }, x, 1e-7);
    CHECK(rel_err(b.jacobian(x, th), fd) <= 1e-6);
  }
}

TEST_CASE("disturbance net output and jacobian") {
  DisturbanceNet net(basis(false));
  net.W = MatX::Random(9, 3);
  HillState x = HillState::Random();
  const Vec3 d = net.eval(x, 0.0);
  CHECK(rel_err(d, Vec3(net.W.transpose() * net.basis.eval(x, 0.0))) < 1e-15);
  const Mat6 J = net.jacobian(x, 0.0);
  CHECK(J.row(kX).norm() == 0.0);
  const MatX fd = fd_jacobian([&](const VecX& s) { return VecX(net.eval(s, 0.0)); }, x);
  CHECK((Vec6(J.row(kYDot)) - Vec6(fd.row(1))).norm() < 1e-6 * (1 + fd.norm()));
}

TEST_CASE("nn2 update") {
  DisturbanceNet net(basis(true));
  const HillState x = HillState::Random();
  AdaptationGains g;
  g.beta = Vec3(1, 2, 3);
  g.gamma = Vec3(1e-3, 2e-3, 4e-3);
  nn2_update(net, Vec3::Zero(), x, 0.2, g, 1.0);
  CHECK(net.W.norm() == 0.0);

  // Theta = 0: plain gradient step dt beta gamma e phi
  const Vec3 e(1e-4, -2e-4, 0.0);
  nn2_update(net, e, x, 0.2, g, 0.5);
  const VecX phi = net.basis.eval(x, 0.2);
  for (int i = 0; i < 3; ++i) CHECK((net.W.col(i) - 0.5 * g.beta(i) * g.gamma(i) * e(i) * phi).norm() < 1e-18);

  // Theta > 0 against an explicit inverse
  DisturbanceNet n2(basis(true));
  g.theta_scale = 0.7;
  nn2_update(n2, e, x, 0.2, g, 0.5);
  const MatX G = n2.basis.jacobian(x, 0.2);
  const MatX M = MatX::Identity(14, 14) / g.gamma(1) + 0.7 * G * G.transpose();
  CHECK(rel_err(VecX(n2.W.col(1)), VecX(0.5 * g.beta(1) * e(1) * M.inverse() * phi)) < 1e-10);
  CHECK_THROWS_AS(nn2_update(n2, e, x, 0.2, g, 0.0), DomainError);
}

TEST_CASE("virtual plant settles at delta / k") {
  for (double k : {0.05, 0.1}) {
    VirtualPlant vp;
    vp.k_tau = Vec6::Constant(k);
    const HillState x = HillState::Zero();
    const Vec3 dhat(2e-6, 0, 0);
    for (int s = 0; s < 2000; ++s) virtual_plant_step(vp, x, Vec3::Zero(), dhat, Mat6::Zero(), 1.0);
    CHECK(vp.xa(kXDot) == doctest::Approx(2e-6 / k).epsilon(1e-10));
    CHECK(std::abs(vp.xa(kX)) < 1e-30);
  }
  VirtualPlant bad;
  bad.k_tau(2) = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("virtual plant tracks a linear plant") {
  // With the plant A X + B U and a held state the virtual plant is exact
  // for a single step when X sits at an equilibrium of A.
  const Mat6 A = hill_linear_matrices(kW).A;
  VirtualPlant vp;
  HillState x = HillState::Zero();
  x(kY) = 3.0;  // along-track offset is a CW equilibrium
  vp.xa = x;
  virtual_plant_step(vp, x, Vec3::Zero(), Vec3::Zero(), A, 1.0);
  CHECK((vp.xa - x).norm() < 1e-15);
}

TEST_CASE("costate backprop formula") {
  const Vec6 e = Vec6::Random(), ln = Vec6::Random();
  const Mat6 D = Mat6::Random() * 1e-3, Q = Mat6::Identity() * 2.0, A = Mat6::Random();
  const Vec6 got = costate_backprop(e, ln, D, Q, A, 0.5);
  CHECK((got - (ln + 0.5 * (2.0 * e + (A + D).transpose() * ln))).norm() < 1e-14);
}

TEST_CASE("nn-lqr with networks off is LQR") {
  const LqrDesign d = design_lqr(kW, Mat6::Identity(), Mat3::Identity() * 1e9);
  FormationParams p;
  p.rho = 5;
  p.theta = deg(45);
  p.m_slope = 1;
  HillState x = formation_to_hill(p, kW, 0.0);
  x(kX) += 0.5;
  const HillState xd = formation_to_hill(p, kW, 0.0);
  const Vec6 xdd = formation_to_hill_rate(p, kW, 0.0);
  const Vec3 lqr = lqr_tracking_control(d, x, xd, xdd, d.A).u;

  NnLqrConfig off;
  off.enabled = false;
  NnLqrController c0(d, off, basis(false), make_lattice_rbf(5, kW), x);
  CHECK((c0.step(0.0, x, xd, xdd, xd, 0.0, 1.0) - lqr).norm() < 1e-20);
  CHECK(c0.log().empty());

  // networks start at zero, so the first command is LQR too
  NnLqrConfig on;
  NnLqrController c1(d, on, basis(true), make_lattice_rbf(5, kW), x);
  CHECK((c1.step(0.0, x, xd, xdd, formation_to_hill(p, kW, 1.0), 0.0, 1.0) - lqr).norm() < 1e-20);
  CHECK(c1.log().size() == 1);
  CHECK(c1.weight_history().size() == 1);
}

TEST_CASE("nn-lqr on a matched linear plant stays with LQR") {
  // The plant is the design model, so the virtual-plant error only carries the
  // held-state discretization and the networks should stay small.
  const LqrDesign d = design_lqr(kW, Mat6::Identity(), Mat3::Identity() * 1e9);
  FormationParams p;
  p.rho = 5;
  p.theta = deg(45);
  p.m_slope = 1;
  HillState x0 = formation_to_hill(p, kW, 0.0);
  x0(kX) += 0.5;
  auto rhs = [&](const Vec3& u) { return [&d, u](double, const Vec6& s) { return Vec6(d.A * s + d.B * u); }; };

  NnLqrConfig cfg;
  cfg.costate_net = false;
  NnLqrController nn(d, cfg, basis(false), make_lattice_rbf(5, kW), x0);
  HillState xa = x0, xb = x0;
  for (int k = 0; k < 2000; ++k) {
    const double t = k;
    const HillState xd = formation_to_hill(p, kW, t);
    const Vec6 xdd = formation_to_hill_rate(p, kW, t);
    const Vec3 ua = lqr_tracking_control(d, xa, xd, xdd, d.A).u;
    const Vec3 ub = nn.step(t, xb, xd, xdd, formation_to_hill(p, kW, t + 1), 0.0, 1.0);
    xa = rk4_step(rhs(ua), t, xa, 1.0);
    xb = rk4_step(rhs(ub), t, xb, 1.0);
  }
  CHECK(position_of(xa - xb).norm() < 0.02 * 0.5);
}

TEST_CASE("nn-lqr config validation") {
  NnLqrConfig c;
  c.R1 = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = NnLqrConfig{};
  c.gains.gamma(1) = -1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = NnLqrConfig{};
  c.gains.theta_scale = -1;
  CHECK_THROWS_AS(c.validate(), DomainError);
}
