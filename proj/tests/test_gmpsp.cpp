#include "helpers.hpp"

#include "sff/gmpsp.hpp"
#include "sff/numerics.hpp"

using namespace sff;
using namespace testing;

namespace {

TruthPlant plant(double e, bool j2) {
  ChiefOrbit c;
  c.e = e;
  c.i = deg(60);
  c.nu0 = deg(10);
  GravityModel g;
  g.j2_enabled = j2;
  return {c, g};
}

HillState start() {
  HillState x;
  x << 2.0, 1e-4, -1.0, 2e-4, 0.5, 0.0;
  return x;
}

// Time-varying test Jacobian.
Mat6 J_of(double t) {
  Mat6 J = hill_linear_matrices(6.3e-4).A;
  J(kXDot, kX) += 1e-6 * std::sin(1e-3 * t);
  J(kYDot, kZ) += 5e-7 * std::cos(2e-3 * t);
  return J;
}

}  // namespace

TEST_CASE("W is the identity when the jacobian vanishes") {
  const std::vector<Mat6> grid(11, Mat6::Zero()), mid(10, Mat6::Zero());
  const SensitivityField f = integrate_W_backward(grid, mid, 2.0);
  for (std::size_t k = 0; k < f.W.size(); ++k) {
    CHECK(f.W[k] == Mat6::Identity());
    CHECK(f.Bc[k] == control_matrix());
  }
  CHECK_THROWS_AS(integrate_W_backward(grid, grid, 2.0), DomainError);
}

TEST_CASE("W matches the matrix exponential for constant jacobians") {
  const Mat6 A = hill_linear_matrices(6.31349e-4).A;
  const int n = 2001;
  const SensitivityField f = integrate_W_backward(std::vector<Mat6>(n, A), std::vector<Mat6>(n - 1, A), 1.0);
  for (int k : {0, 500, 1999}) CHECK(rel_err(f.W[k], Mat6(matrix_exponential(A, n - 1 - k))) <= 1e-8);
}

TEST_CASE("adjoint identity W(t) Phi(t) is constant") {
  const int n = 1501;
  const double dt = 1.0;
  std::vector<Mat6> grid(n), mid(n - 1);
  for (int k = 0; k < n; ++k) grid[k] = J_of(k * dt);
  for (int k = 0; k + 1 < n; ++k) mid[k] = J_of((k + 0.5) * dt);
  const SensitivityField f = integrate_W_backward(grid, mid, dt);
  // forward RK4 of Phi' = J Phi with the same samples
  Mat6 phi = Mat6::Identity();
  for (int k = 0; k + 1 < n; ++k) {
    const Mat6 k1 = grid[k] * phi;
    const Mat6 k2 = mid[k] * (phi + 0.5 * dt * k1);
    const Mat6 k3 = mid[k] * (phi + 0.5 * dt * k2);
    const Mat6 k4 = grid[k + 1] * (phi + dt * k3);
    phi += (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    if ((k + 1) % 250 == 0) CHECK(rel_err(Mat6(f.W[k + 1] * phi), f.W[0]) <= 1e-8);
  }
  CHECK(rel_err(phi, f.W[0]) <= 1e-8);  // W(t0) = Phi(tf, t0)
}

TEST_CASE("accumulators for constant Bc") {
  const int n = 101;
  const double dt = 0.5;
  const SensitivityField f =
      integrate_W_backward(std::vector<Mat6>(n, Mat6::Zero()), std::vector<Mat6>(n - 1, Mat6::Zero()), dt);
  ControlHistory u;
  u.dt = dt;
  u.u.assign(n - 1, Vec3(1, -2, 3));
  const Mat3 R = Mat3::Identity() * 4.0;
  const GmpspAccumulators acc = gmpsp_accumulate(f, u, R);
  const double T = (n - 1) * dt;
  CHECK((acc.A_lambda - T * control_matrix() * control_matrix().transpose() / 4.0).norm() < 1e-12);
  CHECK((acc.b_lambda - T * control_matrix() * Vec3(1, -2, 3)).norm() < 1e-12);
}

TEST_CASE("gmpsp update rejects a singular A_lambda") {
  const SensitivityField f =
      integrate_W_backward(std::vector<Mat6>(3, Mat6::Zero()), std::vector<Mat6>(2, Mat6::Zero()), 1.0);
  ControlHistory u;
  u.u.assign(2, Vec3::Zero());
  const GmpspAccumulators acc = gmpsp_accumulate(f, u, Mat3::Identity());
  CHECK_THROWS_AS(gmpsp_update(acc, Vec6::Ones(), f, Mat3::Identity()), SolverError);
}

TEST_CASE("gmpsp update meets the linearized terminal condition") {
  const TruthPlant p = plant(0.1, true);
  ControlHistory u0;
  u0.u.assign(800, Vec3(1e-6, -2e-6, 5e-7));
  const Trajectory tr = predict_trajectory(p, start(), p.chief.nu0, u0);
  const SensitivityField f = integrate_W_backward(p, tr, u0);
  const Mat3 R = Mat3::Identity() * 1e9;
  const GmpspAccumulators acc = gmpsp_accumulate(f, u0, R);
  const Vec6 dY = Vec6::Random();
  const ControlHistory u = gmpsp_update(acc, dY, f, R);
  // integral of Bc (U0 - U) = dY, with U sampled on the grid; the final
  // sample is Bc(tf) applied to the update formula
  Vec6 lhs = Vec6::Zero();
  const std::size_t n = f.Bc.size();
  const Vec6 nu = acc.A_lambda.llt().solve(dY - acc.b_lambda);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    const Vec3 un = k + 1 < n ? u.u[k] : Vec3(-R.inverse() * f.Bc[k].transpose() * nu);
    const Vec3 uo = k + 1 < n ? u0.u[k] : u0.u.back();
    lhs += w * f.dt * f.Bc[k] * (uo - un);
  }
  CHECK(rel_err(lhs, dY) < 1e-9);
}

TEST_CASE("gmpsp returns a converged guess untouched") {
  const TruthPlant p = plant(0.1, true);
  ControlHistory g;
  g.u.assign(300, Vec3(1e-6, 0, -1e-6));
  const HillState target = predict_trajectory(p, start(), p.chief.nu0, g).terminal();
  const IterativeResult r = gmpsp_solve(p, start(), p.chief.nu0, target, GmpspConfig{}, g);
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.controls.u == g.u);
}

TEST_CASE("gmpsp reaches a nearby target") {
  const TruthPlant p = plant(0.1, true);
  HillState target;
  target << 1.0, 0.0, 1.5, 0.0, -0.5, 0.0;
  ControlHistory g;
  g.u.assign(1000, Vec3::Zero());
  GmpspConfig cfg;
  cfg.tol_rho_pct = 0.01;
  const IterativeResult r = gmpsp_solve(p, start(), p.chief.nu0, target, cfg, g);
  CHECK(r.converged);
  CHECK(r.iterations <= 5);
  // the continuous sensitivities track RK4 closely, so the first update nearly lands
  CHECK(position_of(r.log[1].terminal_error).norm() < 0.01 * position_of(r.log[0].terminal_error).norm());
}
