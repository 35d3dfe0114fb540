#include "helpers.hpp"

#include "sff/dynamics.hpp"
#include "sff/numerics.hpp"

#include <Eigen/Eigenvalues>

using namespace sff;
using namespace testing;

namespace {

ChiefOrbit orbit(double e, double i_deg = 0.0, double nu0_deg = 10.0) {
  ChiefOrbit c;
  c.a = 10000.0;
  c.e = e;
  c.i = deg(i_deg);
  c.nu0 = deg(nu0_deg);
  return c;
}

HillState random_state(double rho_max, double vel = 0.05) {
  HillState x;
  x << uniform(-1, 1), uniform(-vel, vel), uniform(-1, 1), uniform(-vel, vel), uniform(-1, 1), uniform(-vel, vel);
  const double scale = uniform(0.01, 1.0) * rho_max / position_of(x).norm();
  x(kX) *= scale;
  x(kY) *= scale;
  x(kZ) *= scale;
  return x;
}

// Point-mass plus J2 acceleration in ECI.
Vec3 eci_gravity(const GravityModel& g, const Vec3& r, bool j2) {
  const double rn = r.norm();
  Vec3 a = -g.mu * r / (rn * rn * rn);
  if (j2) {
    const double k = -1.5 * g.J2 * g.mu * g.Re * g.Re / std::pow(rn, 5);
    const double zr = 5.0 * r.z() * r.z() / (rn * rn);
    a += k * Vec3(r.x() * (1.0 - zr), r.y() * (1.0 - zr), r.z() * (3.0 - zr));
  }
  return a;
}

}  // namespace

TEST_CASE("chief kinematics closed forms") {
  const ChiefKinematics k = chief_kinematics(orbit(0.0), 1.234);
  CHECK(k.r_c == doctest::Approx(10000.0).epsilon(1e-15));
  CHECK(k.nu_ddot == 0.0);
  CHECK(k.nu_dot == doctest::Approx(6.31349e-4).epsilon(1e-6));
  CHECK(k.nu_dot == doctest::Approx(std::sqrt(398601.0 / 1e12)).epsilon(1e-14));

  const ChiefKinematics p = chief_kinematics(orbit(0.1), 0.0);
  CHECK(p.r_c == doctest::Approx(9000.0).epsilon(1e-14));
  CHECK(p.nu_ddot == 0.0);
}

TEST_CASE("chief kinematics against two-body propagation") {
  // e = 0.15 at nu = 10 deg: integrate the inertial two-body problem and read
  // off r, nu_dot and nu_ddot from the numerical solution.
  const ChiefOrbit c = orbit(0.15);
  const GravityModel g;
  const ChiefKinematics k0 = chief_kinematics(c, c.nu0);
  const HillFrame f = eci_hill_transforms(c, k0);
  Vec6 s;
  s << f.r_chief, f.v_chief;
  auto rhs = [&](double, const Vec6& y) {
    Vec6 d;
    d << y.tail<3>(), eci_gravity(g, y.head<3>(), false);
    return d;
  };
  auto angle = [](const Vec6& y) { return std::atan2(y(1), y(0)); };
  const double h = 0.01;
  std::vector<double> th;
  Vec6 y = s;
  for (int k = 0; k <= 200; ++k) {
    th.push_back(angle(y));
    y = rk4_step(rhs, 0.0, y, h);
  }
  // central differences at t = 1 s (sample 100)
  const double nu_dot = (th[101] - th[99]) / (2 * h);
  const double nu_ddot = (th[101] - 2 * th[100] + th[99]) / (h * h);
  const ChiefKinematics k1 = chief_kinematics(c, c.nu0 + (th[100] - th[0]));
  CHECK(nu_dot == doctest::Approx(k1.nu_dot).epsilon(1e-8));
  CHECK(nu_ddot == doctest::Approx(k1.nu_ddot).epsilon(1e-4));
  CHECK(k0.r_c == doctest::Approx(s.head<3>().norm()).epsilon(1e-14));
  CHECK(k0.r_c >= c.a * (1 - c.e) * (1 - 1e-9));
  CHECK(k0.r_c <= c.a * (1 + c.e) * (1 + 1e-9));
}

TEST_CASE("true anomaly propagation") {
  const ChiefOrbit circ = orbit(0.0, 0, 0);
  const double w = circ.mean_motion(kMuEarth);
  const double T = circ.period(kMuEarth);
  const auto nu = propagate_nu(circ, 0.0, T, 1.0);
  CHECK(std::abs(nu.back() - w * T) < 1e-10);
  for (std::size_t k = 1; k < nu.size(); ++k) CHECK(nu[k] > nu[k - 1]);

  const ChiefOrbit e1 = orbit(0.1, 0, 0);
  const auto nu1 = propagate_nu(e1, 0.0, e1.period(kMuEarth), 1.0);
  CHECK(std::abs(nu1.back() - 2 * M_PI) < 1e-6);

  const ChiefOrbit e15 = orbit(0.15);
  const double a = propagate_nu(e15, 0.0, 2000.0, 1.0).back();
  const double b = propagate_nu(e15, 0.0, 2000.0, 0.5).back();
  CHECK(std::abs(a - b) < 1e-9);
  CHECK_THROWS_AS(propagate_nu(e15, 1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("nonlinear relative dynamics") {
  for (double e : {0.0, 0.15, 0.5})
    for (double nu : {0.0, 0.3, 2.0, 4.0}) {
      const Vec6 f0 = cw_nonlinear_deriv(HillState::Zero(), chief_kinematics(orbit(e), nu), Vec3::Zero(), Vec3::Zero());
      CHECK(f0.isZero(0.0));  // exact, not just small
    }
  const ChiefKinematics kin = chief_kinematics(orbit(0.0), 0.3);

  const LinearModel lm = hill_linear_matrices(kin.nu_dot);
  for (int trial = 0; trial < 50; ++trial) {
    const HillState x = random_state(10.0, 0.01);
    const Vec6 f = cw_nonlinear_deriv(x, kin, Vec3::Zero(), Vec3::Zero());
    CHECK(rel_err(f, Vec6(lm.A * x)) <= 1e-3);
  }
  FormationParams p;
  p.rho = 1.0;
  p.theta = deg(45);
  p.m_slope = 1.0;
  const HillState x1 = formation_to_hill(p, kin.nu_dot, 0.0);
  CHECK(rel_err(cw_nonlinear_deriv(x1, kin, Vec3::Zero(), Vec3::Zero()), Vec6(lm.A * x1)) < 1e-4);

  const HillState x = random_state(50.0);
  const Vec6 diff = cw_nonlinear_deriv(x, kin, Vec3(1e-6, 0, 0), Vec3::Zero()) -
                    cw_nonlinear_deriv(x, kin, Vec3::Zero(), Vec3::Zero());
  Vec6 expect = Vec6::Zero();
  expect(kXDot) = 1e-6;
  CHECK((diff - expect).norm() < 1e-20);

  HillState centre = HillState::Zero();
  centre(kX) = -kin.r_c;
  CHECK_THROWS_AS(cw_nonlinear_deriv(centre, kin, Vec3::Zero(), Vec3::Zero()), DomainError);
}

TEST_CASE("analytic relative-dynamics jacobian matches finite differences") {
  int n = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const ChiefOrbit c = orbit(uniform(0.0, 0.5));
    const ChiefKinematics kin = chief_kinematics(c, uniform(0, 2 * M_PI));
    const HillState x = random_state(100.0);
    const MatX fd = fd_jacobian(
        [&](const VecX& v) { return VecX(cw_nonlinear_deriv(v, kin, Vec3::Zero(), Vec3::Zero())); }, x);
    const Mat6 J = cw_jacobian(x, kin);
    if (rel_err(J, Mat6(fd)) <= 1e-5) ++n;
  }
  CHECK(n == 1000);
}

TEST_CASE("hill linear matrices") {
  const double w = 6.31349e-4;
  const LinearModel m = hill_linear_matrices(w);
  CHECK(m.A(1, 0) == doctest::Approx(1.19580e-6).epsilon(1e-5));
  CHECK(m.A.trace() == 0.0);
  CHECK(m.A(1, 3) == 2 * w);
  CHECK(m.A(3, 1) == -2 * w);
  CHECK(m.A(5, 4) == -w * w);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Mat6>(m.A).eigenvalues();
  int zeros = 0, plus = 0, minus = 0;
  for (int i = 0; i < 6; ++i) {
    if (std::abs(ev(i)) < 1e-9) ++zeros;
    if (std::abs(ev(i) - std::complex<double>(0, w)) < 1e-9) ++plus;
    if (std::abs(ev(i) - std::complex<double>(0, -w)) < 1e-9) ++minus;
  }
  CHECK(zeros == 2);
  CHECK(plus == 2);
  CHECK(minus == 2);
  CHECK(m.B == control_matrix());
  CHECK(control_matrix().col(0)(kXDot) == 1.0);
  CHECK(control_matrix().sum() == 3.0);
  CHECK_THROWS_AS(hill_linear_matrices(0.0), DomainError);
}

TEST_CASE("formation parameters to Hill state") {
  FormationParams p;
  p.rho = 1;
  p.theta = deg(45);
  p.m_slope = 1;
  const HillState x = formation_to_hill(p, 6.31349e-4, 0.0);
  CHECK(x(kX) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(x(kY) == doctest::Approx(1.41421).epsilon(1e-5));
  CHECK(x(kZ) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(formation_to_hill(FormationParams{}, 1e-3, 10.0).norm() == 0.0);
}

TEST_CASE("formation rate is the time derivative") {
  FormationParams p{3.0, 0.4, 0.2, -0.5, 1.3, 0.7};
  const double w = 6.3e-4, t = 321.0, h = 1e-2;
  const Vec6 fd = (formation_to_hill(p, w, t + h) - formation_to_hill(p, w, t - h)) / (2 * h);
  CHECK(rel_err(fd, formation_to_hill_rate(p, w, t)) < 1e-8);
  // the velocity rows of the state equal the rates of the position rows
  const HillState x = formation_to_hill(p, w, t);
  const Vec6 r = formation_to_hill_rate(p, w, t);
  CHECK(x(kXDot) == doctest::Approx(r(kX)).epsilon(1e-12));
  CHECK(x(kYDot) == doctest::Approx(r(kY)).epsilon(1e-12));
  CHECK(x(kZDot) == doctest::Approx(r(kZ)).epsilon(1e-12));
}

TEST_CASE("CW-periodic orbits close after one period") {
  const double w = orbit(0.0).mean_motion(kMuEarth);
  const LinearModel m = hill_linear_matrices(w);
  FormationParams p;
  p.rho = 5;
  p.theta = deg(30);
  p.m_slope = 1.5;
  p.n_slope = 0.3;
  const HillState x0 = formation_to_hill(p, w, 0.0);
  const int n = 2000;
  const double h = (2 * M_PI / w) / n;
  HillState x = x0;
  for (int k = 0; k < n; ++k) x = rk4_step([&](double, const Vec6& s) { return Vec6(m.A * s); }, 0.0, x, h);
  CHECK((x - x0).norm() < 1e-9);
  // and the linear solution tracks formation_to_hill along the way
  CHECK((formation_to_hill(p, w, 0.5 * n * h) - x0).norm() > 1.0);
}

TEST_CASE("Hill and ECI frames") {
  for (int trial = 0; trial < 200; ++trial) {
    ChiefOrbit c = orbit(uniform(0, 0.6), uniform(0, 180), uniform(0, 360));
    c.raan = uniform(0, 2 * M_PI);
    c.arg_perigee = uniform(0, 2 * M_PI);
    const ChiefKinematics kin = chief_kinematics(c, c.nu0);
    const HillFrame f = eci_hill_transforms(c, kin);
    CHECK((f.C.transpose() * f.C - Mat3::Identity()).norm() < 1e-12);
    CHECK(f.omega_hill(2) == doctest::Approx(kin.nu_dot).epsilon(1e-14));
    const HillState x = random_state(100.0);
    const HillState back = eci_to_hill(f, hill_to_eci(f, x));
    CHECK(position_of(back - x).norm() <= 1e-10);
    CHECK(velocity_of(back - x).norm() <= 1e-12);
  }
  const ChiefOrbit eq = orbit(0.0, 0, 0);
  const HillFrame f = eci_hill_transforms(eq, chief_kinematics(eq, 0.0));
  CHECK((f.C.col(0) - Vec3::UnitX()).norm() < 1e-15);
}

TEST_CASE("ECI transport terms reproduce relative velocity") {
  // A deputy on the chief's orbit, slightly later in time, seen in Hill axes.
  const ChiefOrbit c = orbit(0.2, 30);
  const ChiefKinematics k0 = chief_kinematics(c, c.nu0);
  const double nu1 = c.nu0 + 1e-4;
  const HillFrame f0 = eci_hill_transforms(c, k0);
  const HillFrame f1 = eci_hill_transforms(c, chief_kinematics(c, nu1));
  Vec6 rv;
  rv << f1.r_chief, f1.v_chief;
  const HillState x = eci_to_hill(f0, rv);
  // Same orbit: the relative motion satisfies the unforced nonlinear dynamics, so
  // its Hill velocity must be consistent with the nearby-orbit geometry.
  CHECK(x(kZ) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(x(kY) > 0.0);
  CHECK(std::abs(x(kYDot)) < 1e-3);
}

TEST_CASE("deputy elements from relative state") {
  const ChiefOrbit c = orbit(0.1, 50);
  const ChiefKinematics kin = chief_kinematics(c, c.nu0);
  const DeputyElements d0 = deputy_elements_from_state(c, kin, HillState::Zero());
  CHECK(d0.i == doctest::Approx(c.i).epsilon(1e-12));
  CHECK(d0.theta == doctest::Approx(c.nu0 + c.arg_perigee).epsilon(1e-12));
  CHECK(d0.r == doctest::Approx(kin.r_c).epsilon(1e-14));

  HillState radial = HillState::Zero();
  radial(kX) = 3.0;
  const DeputyElements dr = deputy_elements_from_state(c, kin, radial);
  CHECK(dr.i == doctest::Approx(c.i).epsilon(1e-9));
  CHECK(dr.theta == doctest::Approx(c.nu0).epsilon(1e-9));
  CHECK(dr.r == doctest::Approx(kin.r_c + 3.0).epsilon(1e-14));

  const ChiefOrbit node = orbit(0.0, 40, 0);
  const ChiefKinematics kn = chief_kinematics(node, 0.0);
  HillState z = HillState::Zero();
  z(kZ) = 1.0;
  const DeputyElements dz = deputy_elements_from_state(node, kn, z);
  CHECK(std::abs(dz.i - node.i) == doctest::Approx(1.0 / kn.r_c).epsilon(0.01));
}

TEST_CASE("J2 differential acceleration") {
  GravityModel g;
  g.j2_enabled = true;
  const ChiefOrbit c = orbit(0.15, 60);
  const ChiefKinematics kin = chief_kinematics(c, c.nu0);
  CHECK(j2_differential_accel(g, c, kin, HillState::Zero()).norm() < 1e-18);  // roundoff of a ~1e-5 term

  const ChiefOrbit eq = orbit(0.1, 0);
  const ChiefKinematics keq = chief_kinematics(eq, eq.nu0);
  HillState inplane = HillState::Zero();
  inplane << 2.0, 1e-4, -3.0, 2e-4, 0.0, 0.0;
  const Vec3 a = j2_differential_accel(g, eq, keq, inplane);
  CHECK(std::abs(a(2)) < 1e-22);
  CHECK(std::abs(a(0)) > 1e-12);
  const Vec3 own = j2_accel_lvlh(g, 0.0, 0.7, 9000.0);
  CHECK(own(1) == 0.0);
  CHECK(own(2) == 0.0);

  GravityModel off;
  CHECK(j2_differential_accel(off, c, kin, inplane).norm() == 0.0);
}

TEST_CASE("J2 differential acceleration against the inertial-frame oracle") {
  GravityModel g;
  g.j2_enabled = true;
  for (int trial = 0; trial < 100; ++trial) {
    ChiefOrbit c = orbit(uniform(0, 0.3), uniform(10, 170), uniform(0, 360));
    c.raan = uniform(0, 2 * M_PI);
    c.arg_perigee = uniform(0, 2 * M_PI);
    const ChiefKinematics kin = chief_kinematics(c, c.nu0);
    const HillFrame f = eci_hill_transforms(c, kin);
    const HillState x = random_state(uniform(1.0, 10.0), 0.005);
    const Vec6 rv = hill_to_eci(f, x);
    const Vec3 oracle = f.C.transpose() * (eci_gravity(g, rv.head<3>(), true) - eci_gravity(g, rv.head<3>(), false) -
                                           (eci_gravity(g, f.r_chief, true) - eci_gravity(g, f.r_chief, false)));
    const Vec3 ours = j2_differential_accel(g, c, kin, x);
    INFO("trial " << trial);
    CHECK(rel_err(ours, oracle) <= 0.01);
  }
  // magnitude order at the inclined 5 km case
  const ChiefOrbit c = orbit(0.15, 60);
  FormationParams p;
  p.rho = 5;
  p.theta = deg(60);
  p.m_slope = 1.5;
  const HillState x = formation_to_hill(p, c.mean_motion(kMuEarth), 0.0);
  const double mag = j2_differential_accel(g, c, chief_kinematics(c, c.nu0), x).norm();
  CHECK(mag > 1e-9);
  CHECK(mag < 1e-6);
}

TEST_CASE("J2 lvlh difference is antisymmetric in the two satellites") {
  GravityModel g;
  for (int trial = 0; trial < 20; ++trial) {
    const double r = uniform(7000, 12000);
    const double i1 = uniform(0, 3), t1 = uniform(0, 6), i2 = uniform(0, 3), t2 = uniform(0, 6);
    const Vec3 ab = j2_lvlh_difference(g, i1, t1, r, i2, t2, r);
    const Vec3 ba = j2_lvlh_difference(g, i2, t2, r, i1, t1, r);
    CHECK((ab + ba).norm() < 1e-20);
  }
}

TEST_CASE("truth plant") {
  TruthPlant p{orbit(0.0), GravityModel{}};
  HillState x = HillState::Zero();
  double nu = 0.1;
  p.step(x, nu, Vec3::Zero(), 1.0);
  CHECK(x.norm() < 1e-15);
  CHECK(nu == doctest::Approx(0.1 + p.chief.mean_motion(kMuEarth)).epsilon(1e-13));
}

TEST_CASE("orbit and formation validation") {
  ChiefOrbit c;
  c.e = 1.2;
  try {
    c.validate();
    FAIL("expected eccentricity error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("eccentricity") != std::string::npos);
  }
  c.e = 0;
  c.a = -1;
  CHECK_THROWS_AS(c.validate(), DomainError);
  FormationParams f;
  f.rho = -1;
  CHECK_THROWS_AS(f.validate(), DomainError);
  GravityModel g;
  g.mu = 0;
  CHECK_THROWS_AS(g.validate(), DomainError);
}
