#include "sff/dynamics.hpp"

#include "sff/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace sff {

void GravityModel::validate() const {
  if (!(mu > 0.0)) throw DomainError("gravity: mu must be positive");
  if (!(Re > 0.0)) throw DomainError("gravity: Re must be positive");
  if (!std::isfinite(J2)) throw DomainError("gravity: J2 must be finite");
}

void ChiefOrbit::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("chief orbit: semi-major axis must be positive");
  if (!(e >= 0.0 && e < 1.0)) {
    std::ostringstream os;
    os << "chief orbit: eccentricity must satisfy 0 <= e < 1 (got " << e << ")";
    throw DomainError(os.str());
  }
  if (!std::isfinite(i) || !std::isfinite(arg_perigee) || !std::isfinite(raan) || !std::isfinite(nu0))
    throw DomainError("chief orbit: angles must be finite");
}

double ChiefOrbit::mean_motion(double mu) const { return std::sqrt(mu / (a * a * a)); }

double ChiefOrbit::period(double mu) const { return 2.0 * std::numbers::pi / mean_motion(mu); }

void FormationParams::validate() const {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("formation: rho must be non-negative");
  if (!std::isfinite(theta) || !std::isfinite(a_off) || !std::isfinite(b_off) || !std::isfinite(m_slope) ||
      !std::isfinite(n_slope))
    throw DomainError("formation: parameters must be finite");
}

ChiefKinematics chief_kinematics(const ChiefOrbit& orbit, double nu, double mu) {
  const double p = orbit.semi_latus();
  const double ecn = 1.0 + orbit.e * std::cos(nu);
  ChiefKinematics k;
  k.nu = nu;
  k.r_c = p / ecn;
  k.nu_dot = std::sqrt(mu * p) / (k.r_c * k.r_c);
  k.nu_ddot = -2.0 * mu * orbit.e * ecn * ecn * ecn * std::sin(nu) / (p * p * p);
  return k;
}

double nu_rate(const ChiefOrbit& orbit, double nu, double mu) {
  const double p = orbit.semi_latus();
  const double ecn = 1.0 + orbit.e * std::cos(nu);
  return std::sqrt(mu / (p * p * p)) * ecn * ecn;
}

double nu_step(const ChiefOrbit& orbit, double nu, double dt, double mu) {
  const double k1 = nu_rate(orbit, nu, mu);
  const double k2 = nu_rate(orbit, nu + 0.5 * dt * k1, mu);
  const double k3 = nu_rate(orbit, nu + 0.5 * dt * k2, mu);
  const double k4 = nu_rate(orbit, nu + dt * k3, mu);
  return nu + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<double> propagate_nu(const ChiefOrbit& orbit, double t0, double t1, double dt, double mu) {
  if (!(t1 > t0) || !(dt > 0.0)) throw DomainError("propagate_nu: need t1 > t0 and dt > 0");
  std::vector<double> out{orbit.nu0};
  double nu = orbit.nu0;
  double t = t0;
  while (t < t1 - 1e-12 * std::max(1.0, std::abs(t1))) {
    const double h = std::min(dt, t1 - t);
    nu = nu_step(orbit, nu, h, mu);
    t += h;
    out.push_back(nu);
  }
  return out;
}

namespace {
double gamma_of(const HillState& x, double r_c) {
  const double rx = r_c + x[kX];
  const double d2 = rx * rx + x[kY] * x[kY] + x[kZ] * x[kZ];
  return d2 * std::sqrt(d2);
}
}  // namespace

Vec6 cw_nonlinear_deriv(const HillState& x, const ChiefKinematics& kin, const Vec3& u, const Vec3& d, double mu) {
  const double gam = gamma_of(x, kin.r_c);
  if (!(gam > 0.0)) throw DomainError("cw_nonlinear_deriv: deputy at the geocenter (gamma = 0)");
  // d^2 = r_c^2 (1 - xi); t = (1 - xi)^(-3/2) - 1 without cancellation, so the
  // radial term mu/r_c^2 - (mu/d^3)(r_c + x) vanishes exactly at the chief.
  const double rc = kin.r_c;
  const double sx = x[kX] / rc;
  const double xi = -2.0 * sx - (x[kX] * x[kX] + x[kY] * x[kY] + x[kZ] * x[kZ]) / (rc * rc);
  const double t = std::expm1(-1.5 * std::log1p(-xi));
  const double m2 = mu / (rc * rc);
  const double g = m2 / rc * (1.0 + t);
  const double nd = kin.nu_dot, ndd = kin.nu_ddot;
  Vec6 f;
  f[kX] = x[kXDot];
  f[kXDot] = 2.0 * nd * x[kYDot] + ndd * x[kY] + nd * nd * x[kX] - m2 * (sx + t * (1.0 + sx)) + u[0] + d[0];
  f[kY] = x[kYDot];
  f[kYDot] = -2.0 * nd * x[kXDot] - ndd * x[kX] + nd * nd * x[kY] - g * x[kY] + u[1] + d[1];
  f[kZ] = x[kZDot];
  f[kZDot] = -g * x[kZ] + u[2] + d[2];
  return f;
}

Mat6 cw_jacobian(const HillState& x, const ChiefKinematics& kin, double mu) {
  const double gam = gamma_of(x, kin.r_c);
  if (!(gam > 0.0)) throw DomainError("cw_jacobian: deputy at the geocenter (gamma = 0)");
  const double g = mu / gam;
  const double d2 = std::cbrt(gam * gam);
  const double h = 3.0 * mu / (gam * d2);  // 3 mu / d^5
  const Vec3 q(kin.r_c + x[kX], x[kY], x[kZ]);
  const double nd = kin.nu_dot, ndd = kin.nu_ddot;

  Mat6 J = Mat6::Zero();
  J(kX, kXDot) = 1.0;
  J(kY, kYDot) = 1.0;
  J(kZ, kZDot) = 1.0;
  const int pos[3] = {kX, kY, kZ};
  const int acc[3] = {kXDot, kYDot, kZDot};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) J(acc[r], pos[c]) = h * q[r] * q[c] - (r == c ? g : 0.0);
  J(kXDot, kX) += nd * nd;
  J(kXDot, kY) += ndd;
  J(kXDot, kYDot) = 2.0 * nd;
  J(kYDot, kX) += -ndd;
  J(kYDot, kY) += nd * nd;
  J(kYDot, kXDot) = -2.0 * nd;
  return J;
}

Mat63 control_matrix() {
  Mat63 B = Mat63::Zero();
  B(kXDot, 0) = 1.0;
  B(kYDot, 1) = 1.0;
  B(kZDot, 2) = 1.0;
  return B;
}

LinearModel hill_linear_matrices(double omega) {
  if (!(omega > 0.0)) throw DomainError("hill_linear_matrices: omega must be positive");
  LinearModel m;
  m.A = Mat6::Zero();
  m.A(kX, kXDot) = 1.0;
  m.A(kY, kYDot) = 1.0;
  m.A(kZ, kZDot) = 1.0;
  m.A(kXDot, kX) = 3.0 * omega * omega;
  m.A(kXDot, kYDot) = 2.0 * omega;
  m.A(kYDot, kXDot) = -2.0 * omega;
  m.A(kZDot, kZ) = -omega * omega;
  m.B = control_matrix();
  return m;
}

HillState formation_to_hill(const FormationParams& p, double omega, double t) {
  const double s = std::sin(omega * t + p.theta), c = std::cos(omega * t + p.theta);
  HillState x;
  x[kX] = p.rho * s + p.a_off;
  x[kXDot] = p.rho * omega * c;
  x[kY] = 2.0 * p.rho * c - 1.5 * omega * p.a_off * t + p.b_off;
  x[kYDot] = -2.0 * p.rho * omega * s - 1.5 * omega * p.a_off;
  x[kZ] = p.m_slope * p.rho * s + 2.0 * p.n_slope * p.rho * c;
  x[kZDot] = p.m_slope * p.rho * omega * c - 2.0 * p.n_slope * p.rho * omega * s;
  return x;
}

Vec6 formation_to_hill_rate(const FormationParams& p, double omega, double t) {
  const double s = std::sin(omega * t + p.theta), c = std::cos(omega * t + p.theta);
  const double w2 = omega * omega;
  Vec6 v;
  v[kX] = p.rho * omega * c;
  v[kXDot] = -p.rho * w2 * s;
  v[kY] = -2.0 * p.rho * omega * s - 1.5 * omega * p.a_off;
  v[kYDot] = -2.0 * p.rho * w2 * c;
  v[kZ] = p.m_slope * p.rho * omega * c - 2.0 * p.n_slope * p.rho * omega * s;
  v[kZDot] = -p.m_slope * p.rho * w2 * s - 2.0 * p.n_slope * p.rho * w2 * c;
  return v;
}

HillFrame eci_hill_transforms(const ChiefOrbit& chief, const ChiefKinematics& kin, double mu) {
  const double th = kin.nu + chief.arg_perigee;
  const double cO = std::cos(chief.raan), sO = std::sin(chief.raan);
  const double ci = std::cos(chief.i), si = std::sin(chief.i);
  const double ct = std::cos(th), st = std::sin(th);
  Mat3 R3O, R1i, R3t;
  R3O << cO, -sO, 0, sO, cO, 0, 0, 0, 1;
  R1i << 1, 0, 0, 0, ci, -si, 0, si, ci;
  R3t << ct, -st, 0, st, ct, 0, 0, 0, 1;
  HillFrame f;
  f.C = R3O * R1i * R3t;
  f.omega_hill = Vec3(0.0, 0.0, kin.nu_dot);
  const double rdot = std::sqrt(mu / chief.semi_latus()) * chief.e * std::sin(kin.nu);
  f.r_chief = kin.r_c * f.C.col(0);
  f.v_chief = rdot * f.C.col(0) + kin.r_c * kin.nu_dot * f.C.col(1);
  return f;
}

Vec6 hill_to_eci(const HillFrame& frame, const HillState& x) {
  const Vec3 rho = position_of(x), rhod = velocity_of(x);
  Vec6 rv;
  rv.head<3>() = frame.r_chief + frame.C * rho;
  rv.tail<3>() = frame.v_chief + frame.C * (rhod + frame.omega_hill.cross(rho));
  return rv;
}

HillState eci_to_hill(const HillFrame& frame, const Vec6& rv) {
  const Vec3 rho = frame.C.transpose() * (rv.head<3>() - frame.r_chief);
  const Vec3 rhod = frame.C.transpose() * (rv.tail<3>() - frame.v_chief) - frame.omega_hill.cross(rho);
  HillState x;
  x << rho[0], rhod[0], rho[1], rhod[1], rho[2], rhod[2];
  return x;
}

DeputyElements deputy_elements_from_state(const ChiefOrbit& chief, const ChiefKinematics& kin, const HillState& x,
                                          double mu) {
  const HillFrame frame = eci_hill_transforms(chief, kin, mu);
  const Vec6 rv = hill_to_eci(frame, x);
  const Vec3 r = rv.head<3>(), v = rv.tail<3>();
  const Vec3 h = r.cross(v);
  const double rn = r.norm(), hn = h.norm();
  if (!(rn > 0.0)) throw DomainError("deputy_elements_from_state: deputy radius is zero");
  if (!(hn > 1e-12 * rn * v.norm()) || !(hn > 0.0))
    throw DomainError("deputy_elements_from_state: degenerate angular momentum (rectilinear deputy motion)");
  DeputyElements de;
  de.r = rn;
  const Vec3 hhat = h / hn;
  de.i = std::acos(std::clamp(hhat[2], -1.0, 1.0));
  const Vec3 node(-h[1], h[0], 0.0);
  const double nn = node.norm();
  if (nn <= 1e-12 * hn) {
    // Equatorial orbit: the node is undefined, use the true longitude.
    de.theta = std::atan2(r[1], r[0]);
  } else {
    const Vec3 nhat = node / nn;
    de.theta = std::atan2(r.dot(hhat.cross(nhat)), r.dot(nhat));
  }
  de.lvlh.col(0) = r / rn;
  de.lvlh.col(2) = hhat;
  de.lvlh.col(1) = hhat.cross(de.lvlh.col(0));
  return de;
}

Vec3 j2_accel_lvlh(const GravityModel& g, double i, double theta, double r) {
  const double k = 1.5 * g.mu * g.J2 * g.Re * g.Re / (r * r * r * r);
  const double si = std::sin(i), ci = std::cos(i), st = std::sin(theta), ct = std::cos(theta);
  return -k * Vec3(1.0 - 3.0 * si * si * st * st, 2.0 * si * si * st * ct, 2.0 * si * ci * st);
}

Vec3 j2_lvlh_difference(const GravityModel& g, double i_c, double th_c, double r_c, double i_d, double th_d,
                        double r_d) {
  return j2_accel_lvlh(g, i_d, th_d, r_d) - j2_accel_lvlh(g, i_c, th_c, r_c);
}

Vec3 j2_differential_accel(const GravityModel& g, const ChiefOrbit& chief, const ChiefKinematics& kin,
                           const HillState& x) {
  if (!g.j2_enabled) return Vec3::Zero();
  const HillFrame frame = eci_hill_transforms(chief, kin, g.mu);
  const Vec3 a_c = j2_accel_lvlh(g, chief.i, kin.nu + chief.arg_perigee, kin.r_c);
  const DeputyElements de = deputy_elements_from_state(chief, kin, x, g.mu);
  const Vec3 a_d_eci = de.lvlh * j2_accel_lvlh(g, de.i, de.theta, de.r);
  return frame.C.transpose() * a_d_eci - a_c;
}

Vec6 TruthPlant::deriv(const HillState& x, double nu, const Vec3& u) const {
  const ChiefKinematics kin = kinematics(nu);
  const Vec3 d = j2_differential_accel(gravity, chief, kin, x);
  return cw_nonlinear_deriv(x, kin, u, d, gravity.mu);
}

void TruthPlant::step(HillState& x, double& nu, const Vec3& u, double dt) const {
  Vec7 s;
  s.head<6>() = x;
  s[6] = nu;
  auto f = [&](double, const Vec7& y) {
    Vec7 out;
    out.head<6>() = deriv(y.head<6>(), y[6], u);
    out[6] = nu_rate(chief, y[6], gravity.mu);
    return out;
  };
  s = rk4_step(f, 0.0, s, dt);
  x = s.head<6>();
  nu = s[6];
}

}  // namespace sff
