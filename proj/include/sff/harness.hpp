#pragma once

#include "sff/gmpsp.hpp"
#include "sff/lqr.hpp"
#include "sff/mpsp.hpp"
#include "sff/nnlqr.hpp"
#include "sff/sdre.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sff {

enum class ControllerKind { None, Lqr, Sdre, SdreIntegral, FiniteSdre, Mpsp, Gmpsp, NnLqr };

// Guess history for the iterative methods: LQR regulating X to the origin,
// or LQR tracking the desired formation.
enum class GuessKind { Regulator, Tracking };

const char* to_string(ControllerKind k);
ControllerKind controller_kind_from_string(const std::string& s);

struct ControllerSpec {
  ControllerKind kind = ControllerKind::Lqr;
  Mat6 Q = Mat6::Identity();
  Mat3 R = Mat3::Identity() * 1e9;

  // sdre family
  SdcVariant sdc = SdcVariant::Sdc1;
  int series_order = 4;
  double ki_scale = 0.0;        // K_I = ki_scale * K_P
  bool j2_feedforward = false;  // cancel modeled differential J2
  Mat6 Q_finite = Mat6::Zero();
  FiniteSdreScheme scheme = FiniteSdreScheme::Receding;

  GuessKind guess = GuessKind::Regulator;
  MpspConfig mpsp;
  GmpspConfig gmpsp;
  NnLqrConfig nn;

  void validate() const;
  friend bool operator==(const ControllerSpec&, const ControllerSpec&) = default;
};

struct Scenario {
  std::string name = "scenario";
  ChiefOrbit chief;                        // what the controller believes
  std::optional<ChiefOrbit> truth_chief;   // truth-plant override
  GravityModel gravity;                    // truth gravity; j2_enabled switches J2
  FormationParams initial;
  FormationParams desired;
  double tf = 2000.0;
  double dt = 1.0;
  double settle_threshold_pct = 1.0;
  ControllerSpec controller;

  void validate() const;
  int steps() const;  // number of control intervals
  const ChiefOrbit& truth() const { return truth_chief ? *truth_chief : chief; }
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct RunResult {
  std::string scenario;
  std::string controller;
  std::vector<double> t;
  std::vector<HillState> x;
  std::vector<HillState> xd;
  std::vector<Vec3> u;  // same length as t, last control held at tf
  Vec6 terminal_error = Vec6::Zero();
  double rho_error_pct = 0.0;
  double effort = 0.0;
  std::optional<double> settle_time;
  std::vector<IterationLog> iterations;
  bool converged = true;
  double max_feedforward_residual = 0.0;
  std::vector<NnStepLog> nn_log;
  std::vector<MatX> nn_weights;  // disturbance weights after each step

  Vec3 terminal_position_error() const { return position_of(terminal_error); }
};

RunResult run_scenario(const Scenario& s);

// NN-LQR closed loop on the approximate plant A X + B U + dhat(X), with dhat
// replaying the per-step disturbance weights of an actual-plant run.
RunResult run_nnlqr_approx_plant(const Scenario& s, const std::vector<MatX>& weights);

// First grid time after which |pos error| stays below threshold_pct of the
// commanded baseline through the end; nullopt when never settled.
std::optional<double> settle_time(const RunResult& r, double rho_commanded, double threshold_pct);

struct CompareRow {
  std::string scenario;
  std::string controller;
  bool ok = false;
  std::string error;
  Vec6 terminal_error = Vec6::Zero();
  double rho_error_pct = 0.0;
  double effort = 0.0;
  std::optional<double> settle_time;
  int iterations = 0;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  void write_csv(std::ostream& os) const;
  void write_table(std::ostream& os) const;
};

CompareReport compare(const std::vector<Scenario>& cells);

CompareRow summarize(const RunResult& r);

std::string fmt17(double v);
void write_trajectory_csv(std::ostream& os, const RunResult& r);
void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const RunResult& r);
void write_iteration_csv(std::ostream& os, const std::vector<IterationLog>& log);
void write_nn_log_csv(std::ostream& os, const std::vector<NnStepLog>& log);

}  // namespace sff
