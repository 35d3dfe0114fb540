#pragma once

#include "sff/types.hpp"

#include <vector>

namespace sff {

inline constexpr double kMuEarth = 398601.0;       // km^3/s^2
inline constexpr double kEarthRadius = 6378.137;   // km
inline constexpr double kJ2Earth = 0.0010826;

struct GravityModel {
  double mu = kMuEarth;
  double Re = kEarthRadius;
  double J2 = kJ2Earth;
  bool j2_enabled = false;

  void validate() const;
  friend bool operator==(const GravityModel&, const GravityModel&) = default;
};

// Keplerian elements of the chief. Angles in radians.
struct ChiefOrbit {
  double a = 10000.0;
  double e = 0.0;
  double i = 0.0;
  double arg_perigee = 0.0;
  double raan = 0.0;
  double nu0 = 0.0;

  void validate() const;
  double semi_latus() const { return a * (1.0 - e * e); }
  double mean_motion(double mu) const;
  double period(double mu) const;
  friend bool operator==(const ChiefOrbit&, const ChiefOrbit&) = default;
};

struct ChiefKinematics {
  double nu = 0.0;
  double nu_dot = 0.0;
  double nu_ddot = 0.0;
  double r_c = 0.0;
};

struct FormationParams {
  double rho = 0.0;
  double theta = 0.0;
  double a_off = 0.0;
  double b_off = 0.0;
  double m_slope = 0.0;
  double n_slope = 0.0;

  void validate() const;
  friend bool operator==(const FormationParams&, const FormationParams&) = default;
};

ChiefKinematics chief_kinematics(const ChiefOrbit& orbit, double nu, double mu = kMuEarth);

// dnu/dt for the chief at true anomaly nu.
double nu_rate(const ChiefOrbit& orbit, double nu, double mu = kMuEarth);

// One RK4 step of the true-anomaly ODE.
double nu_step(const ChiefOrbit& orbit, double nu, double dt, double mu = kMuEarth);

// nu sampled at t0, t0 + dt, ..., t1 (last sample lands exactly on t1).
std::vector<double> propagate_nu(const ChiefOrbit& orbit, double t0, double t1, double dt, double mu = kMuEarth);

// Nonlinear relative dynamics. u and d enter the acceleration rows only.
Vec6 cw_nonlinear_deriv(const HillState& x, const ChiefKinematics& kin, const Vec3& u, const Vec3& d,
                        double mu = kMuEarth);

// Analytic d f / d X of the unforced nonlinear relative dynamics.
Mat6 cw_jacobian(const HillState& x, const ChiefKinematics& kin, double mu = kMuEarth);

struct LinearModel {
  Mat6 A;
  Mat63 B;
};

LinearModel hill_linear_matrices(double omega);

// Input matrix shared by every model: accelerations drive rows 2, 4, 6.
Mat63 control_matrix();

HillState formation_to_hill(const FormationParams& p, double omega, double t);
// Analytic time derivative of formation_to_hill.
Vec6 formation_to_hill_rate(const FormationParams& p, double omega, double t);

struct HillFrame {
  Mat3 C;              // columns: radial, along-track, cross-track unit vectors in ECI
  Vec3 omega_hill;     // frame angular velocity expressed in Hill axes
  Vec3 r_chief;        // chief ECI position, km
  Vec3 v_chief;        // chief ECI velocity, km/s
};

HillFrame eci_hill_transforms(const ChiefOrbit& chief, const ChiefKinematics& kin, double mu = kMuEarth);

// Position/velocity 6-vector [r; v] in ECI.
Vec6 hill_to_eci(const HillFrame& frame, const HillState& x);
HillState eci_to_hill(const HillFrame& frame, const Vec6& rv);

struct DeputyElements {
  double i = 0.0;
  double theta = 0.0;  // argument of latitude
  double r = 0.0;
  Mat3 lvlh;           // deputy radial / along-track / normal axes in ECI
};

DeputyElements deputy_elements_from_state(const ChiefOrbit& chief, const ChiefKinematics& kin, const HillState& x,
                                          double mu = kMuEarth);

// J2 acceleration of a single satellite in its own radial/along-track/normal axes.
Vec3 j2_accel_lvlh(const GravityModel& g, double i, double theta, double r);

// Difference of the two satellites' J2 accelerations, each in its own axes
// (deputy minus chief). Ignores the small rotation between the two frames.
Vec3 j2_lvlh_difference(const GravityModel& g, double i_c, double th_c, double r_c, double i_d, double th_d,
                        double r_d);

// Differential J2 acceleration acting on the relative motion, in Hill axes.
Vec3 j2_differential_accel(const GravityModel& g, const ChiefOrbit& chief, const ChiefKinematics& kin,
                           const HillState& x);

// Truth plant: nonlinear relative motion plus optional differential J2,
// carrying the chief true anomaly as a seventh state.
struct TruthPlant {
  ChiefOrbit chief;
  GravityModel gravity;

  Vec6 deriv(const HillState& x, double nu, const Vec3& u) const;
  // Advance (x, nu) by one RK4 step with u held constant.
  void step(HillState& x, double& nu, const Vec3& u, double dt) const;
  ChiefKinematics kinematics(double nu) const { return chief_kinematics(chief, nu, gravity.mu); }
};

}  // namespace sff
