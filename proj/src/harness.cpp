#include "sff/harness.hpp"

#include "sff/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

namespace sff {

namespace {

struct KindName {
  ControllerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ControllerKind::None, "none"},       {ControllerKind::Lqr, "lqr"},
    {ControllerKind::Sdre, "sdre"},       {ControllerKind::SdreIntegral, "sdre-integral"},
    {ControllerKind::FiniteSdre, "fsdre"}, {ControllerKind::Mpsp, "mpsp"},
    {ControllerKind::Gmpsp, "gmpsp"},     {ControllerKind::NnLqr, "nnlqr"},
};

// Re-throw a step failure with the grid index attached, keeping the category.
[[noreturn]] void rethrow_at(int k, double t, const Error& e) {
  std::ostringstream os;
  os << "step " << k << " (t = " << t << " s): " << e.what();
  if (dynamic_cast<const SolverError*>(&e)) throw SolverError(os.str());
  if (dynamic_cast<const DomainError*>(&e)) throw DomainError(os.str());
  throw PropagationError(os.str());
}

// Control law evaluated once per grid point.
struct StepInput {
  int k;
  double t;
  const HillState& x;
  const HillState& xd;
  const Vec6& xd_dot;
  const ChiefKinematics& kin;  // believed chief
};
using Law = std::function<Vec3(const StepInput&)>;
// Advances the plant state over one interval.
using PlantStep = std::function<void(HillState& x, int k, const Vec3& u)>;

struct Setup {
  double omega;
  int n;
  HillState x0;
  std::vector<HillState> xd;
  std::vector<Vec6> xd_dot;
  std::vector<ChiefKinematics> kin;  // believed chief along the grid
};

Setup make_setup(const Scenario& s) {
  Setup st;
  const double mu = s.gravity.mu;
  st.omega = s.chief.mean_motion(mu);
  st.n = s.steps();
  st.x0 = formation_to_hill(s.initial, st.omega, 0.0);
  st.xd.resize(st.n + 1);
  st.xd_dot.resize(st.n + 1);
  st.kin.resize(st.n + 1);
  double nu = s.chief.nu0;
  for (int k = 0; k <= st.n; ++k) {
    const double t = k * s.dt;
    st.xd[k] = formation_to_hill(s.desired, st.omega, t);
    st.xd_dot[k] = formation_to_hill_rate(s.desired, st.omega, t);
    st.kin[k] = chief_kinematics(s.chief, nu, mu);
    if (k < st.n) nu = nu_step(s.chief, nu, s.dt, mu);
  }
  return st;
}

void finish(RunResult& r, const Scenario& s, const Setup& st) {
  r.xd = st.xd;
  r.terminal_error = r.x.back() - st.xd.back();
  r.rho_error_pct = rho_error_pct(r.x.back(), st.xd.back());
  ControlHistory h;
  h.dt = s.dt;
  h.u.assign(r.u.begin(), r.u.end() - 1);
  r.effort = control_effort(h);
  r.settle_time = settle_time(r, s.desired.rho, s.settle_threshold_pct);
}

RunResult closed_loop(const Scenario& s, const Setup& st, const Law& law, const PlantStep& plant) {
  RunResult r;
  r.scenario = s.name;
  r.controller = to_string(s.controller.kind);
  r.t.resize(st.n + 1);
  r.x.resize(st.n + 1);
  r.u.resize(st.n + 1);
  HillState x = st.x0;
  for (int k = 0; k < st.n; ++k) {
    const double t = k * s.dt;
    r.t[k] = t;
    r.x[k] = x;
    try {
      const Vec3 u = law(StepInput{k, t, x, st.xd[k], st.xd_dot[k], st.kin[k]});
      if (!u.allFinite()) throw SolverError("controller returned a non-finite command");
      r.u[k] = u;
      plant(x, k, u);
      if (!x.allFinite()) throw PropagationError("non-finite state");
    } catch (const Error& e) {
      rethrow_at(k, t, e);
    }
  }
  r.t[st.n] = st.n * s.dt;
  r.x[st.n] = x;
  r.u[st.n] = st.n > 0 ? r.u[st.n - 1] : Vec3::Zero();
  finish(r, s, st);
  return r;
}

PlantStep truth_step(const Scenario& s) {
  auto plant = std::make_shared<TruthPlant>(TruthPlant{s.truth(), s.gravity});
  auto nu = std::make_shared<double>(s.truth().nu0);
  const double dt = s.dt;
  return [plant, nu, dt](HillState& x, int, const Vec3& u) { plant->step(x, *nu, u, dt); };
}

ControlHistory lqr_guess(const Scenario& s, const Setup& st, const TruthPlant& model) {
  const LqrDesign d = design_lqr(st.omega, s.controller.Q, s.controller.R);
  ControlHistory h;
  h.dt = s.dt;
  h.u.resize(st.n);
  HillState x = st.x0;
  double nu = model.chief.nu0;
  for (int k = 0; k < st.n; ++k) {
    h.u[k] = s.controller.guess == GuessKind::Tracking ? lqr_tracking_control(d, x, st.xd[k], st.xd_dot[k], d.A).u
                                                       : Vec3(-d.K * x);
    model.step(x, nu, h.u[k], s.dt);
  }
  return h;
}

RunResult run_iterative(const Scenario& s, const Setup& st) {
  const TruthPlant model{s.chief, s.gravity};
  const TruthPlant truth{s.truth(), s.gravity};
  const ControlHistory guess = lqr_guess(s, st, model);
  const IterativeResult ir = s.controller.kind == ControllerKind::Mpsp
                                 ? mpsp_solve(model, st.x0, s.chief.nu0, st.xd.back(), s.controller.mpsp, guess)
                                 : gmpsp_solve(model, st.x0, s.chief.nu0, st.xd.back(), s.controller.gmpsp, guess);
  const Trajectory tr = predict_trajectory(truth, st.x0, s.truth().nu0, ir.controls);
  RunResult r;
  r.scenario = s.name;
  r.controller = to_string(s.controller.kind);
  r.x = tr.x;
  r.t.resize(tr.x.size());
  for (std::size_t k = 0; k < r.t.size(); ++k) r.t[k] = k * s.dt;
  r.u = ir.controls.u;
  r.u.push_back(ir.controls.u.back());
  r.iterations = ir.log;
  r.converged = ir.converged;
  finish(r, s, st);
  return r;
}

double chief_radius(const ChiefOrbit& c) { return c.semi_latus() / (1.0 + c.e * std::cos(c.nu0)); }

struct NnParts {
  LqrDesign design;
  DisturbanceBasis basis;
  RbfNetwork rbf;
};

NnParts nn_parts(const Scenario& s, const Setup& st) {
  NnParts p{design_lqr(st.omega, s.controller.Q, s.controller.R),
            build_disturbance_basis(s.gravity, chief_radius(s.chief), s.desired.rho, st.omega),
            make_lattice_rbf(s.desired.rho, st.omega)};
  p.basis.trig_terms = s.controller.nn.trig_terms;
  return p;
}

RunResult run_nn(const Scenario& s, const Setup& st, const PlantStep& plant) {
  const NnParts parts = nn_parts(s, st);
  NnLqrController ctl(parts.design, s.controller.nn, parts.basis, parts.rbf, st.x0);
  const double argp = s.chief.arg_perigee;
  const double dt = s.dt;
  Law law = [&](const StepInput& in) {
    return ctl.step(in.t, in.x, in.xd, in.xd_dot, st.xd[in.k + 1], in.kin.nu + argp, dt);
  };
  RunResult r = closed_loop(s, st, law, plant);
  r.nn_log = ctl.log();
  r.nn_weights = ctl.weight_history();
  return r;
}

}  // namespace

const char* to_string(ControllerKind k) {
  for (const auto& kn : kKindNames)
    if (kn.kind == k) return kn.name;
  return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& s) {
  for (const auto& kn : kKindNames)
    if (s == kn.name) return kn.kind;
  throw DomainError("unknown controller '" + s + "'");
}

void ControllerSpec::validate() const {
  if (!Q.allFinite() || (Q - Q.transpose()).norm() > 1e-12 * (1.0 + Q.norm()))
    throw DomainError("controller: Q must be symmetric");
  if (Eigen::SelfAdjointEigenSolver<Mat6>(Q).eigenvalues().minCoeff() < 0.0)
    throw DomainError("controller: Q must be positive semidefinite");
  if (R.llt().info() != Eigen::Success || (R - R.transpose()).norm() > 1e-12 * R.norm())
    throw DomainError("controller: R must be symmetric positive definite");
  if (series_order < 1) throw DomainError("controller: series_order must be >= 1");
  if (ki_scale < 0.0) throw DomainError("controller: ki_scale must be >= 0");
  mpsp.validate();
  gmpsp.validate();
  nn.validate();
}

void Scenario::validate() const {
  chief.validate();
  if (truth_chief) truth_chief->validate();
  gravity.validate();
  initial.validate();
  desired.validate();
  if (!(dt > 0.0)) throw DomainError("scenario: dt must be positive");
  if (!(tf > 0.0)) throw DomainError("scenario: tf must be positive");
  const double ratio = tf / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw DomainError("scenario: tf must be an integral multiple of dt");
  if (!(desired.rho > 0.0)) throw DomainError("scenario: desired rho must be positive");
  if (!(settle_threshold_pct > 0.0)) throw DomainError("scenario: settle threshold must be positive");
  controller.validate();
}

int Scenario::steps() const { return static_cast<int>(std::lround(tf / dt)); }

RunResult run_scenario(const Scenario& s) {
  s.validate();
  const Setup st = make_setup(s);
  const ControllerSpec& c = s.controller;
  const double mu = s.gravity.mu;

  switch (c.kind) {
    case ControllerKind::Mpsp:
    case ControllerKind::Gmpsp:
      return run_iterative(s, st);
    case ControllerKind::NnLqr:
      return run_nn(s, st, truth_step(s));
    default:
      break;
  }

  const SdcModel model{c.sdc, c.series_order};
  auto j2_ff = [&](const StepInput& in) -> Vec3 {
    if (!c.j2_feedforward || !s.gravity.j2_enabled) return Vec3::Zero();
    return -j2_differential_accel(s.gravity, s.chief, in.kin, in.x);
  };

  Law law;
  double max_resid = 0.0;
  LqrDesign design;
  Vec6 acc = Vec6::Zero();
  FiniteHorizonSpec fh;
  fh.tf = s.tf;
  fh.xf = st.xd.back();
  fh.Q = c.Q_finite;
  fh.R = c.R;
  FiniteTimeSdre fsdre(fh, model, c.scheme, mu);

  switch (c.kind) {
    case ControllerKind::None:
      law = [](const StepInput&) { return Vec3::Zero(); };
      break;
    case ControllerKind::Lqr:
      design = design_lqr(st.omega, c.Q, c.R);
      law = [&](const StepInput& in) {
        const TrackingCommand cmd = lqr_tracking_control(design, in.x, in.xd, in.xd_dot, design.A);
        max_resid = std::max(max_resid, cmd.feedforward_residual);
        return cmd.u;
      };
      break;
    case ControllerKind::Sdre:
      law = [&](const StepInput& in) {
        return Vec3(sdre_infinite_control(in.x, in.xd, model, in.kin, c.Q, c.R, mu) + j2_ff(in));
      };
      break;
    case ControllerKind::SdreIntegral:
      law = [&](const StepInput& in) {
        const Mat36 KP = sdre_gain(in.x, model, in.kin, c.Q, c.R, mu);
        const Vec3 u = sdre_integral_control(in.x, in.xd, acc, KP, c.ki_scale * KP) + j2_ff(in);
        acc += (in.x - in.xd) * s.dt;
        return u;
      };
      break;
    case ControllerKind::FiniteSdre:
      law = [&](const StepInput& in) { return fsdre.control(in.x, in.t, in.kin); };
      break;
    default:
      throw DomainError("run_scenario: unsupported controller");
  }
  RunResult r = closed_loop(s, st, law, truth_step(s));
  r.max_feedforward_residual = max_resid;
  return r;
}

RunResult run_nnlqr_approx_plant(const Scenario& s, const std::vector<MatX>& weights) {
  s.validate();
  if (weights.empty()) throw DomainError("approximate plant: no disturbance weights to replay");
  const Setup st = make_setup(s);
  const NnParts parts = nn_parts(s, st);
  const Mat6 A = parts.design.A;
  const Mat63 B = control_matrix();
  const DisturbanceBasis basis = parts.basis;
  const double argp = s.chief.arg_perigee;
  const double dt = s.dt;
  PlantStep plant = [&](HillState& x, int k, const Vec3& u) {
    const MatX& W = weights[std::min<std::size_t>(k, weights.size() - 1)];
    const double theta = st.kin[k].nu + argp;
    auto f = [&](double, const HillState& y) -> HillState {
      const Vec3 d = W.transpose() * basis.eval(y, theta);
      return A * y + B * (u + d);
    };
    x = rk4_step(f, 0.0, x, dt);
  };
  return run_nn(s, st, plant);
}

std::optional<double> settle_time(const RunResult& r, double rho_commanded, double threshold_pct) {
  if (!(threshold_pct > 0.0)) throw DomainError("settle_time: threshold must be positive");
  if (r.x.size() != r.xd.size() || r.x.size() != r.t.size())
    throw DomainError("settle_time: state, desired and time grids differ in length");
  const double limit = threshold_pct / 100.0 * rho_commanded;
  std::optional<double> out;
  for (std::size_t k = r.x.size(); k-- > 0;) {
    if ((position_of(r.x[k]) - position_of(r.xd[k])).norm() >= limit) break;
    out = r.t[k];
  }
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const RunResult& r) {
  os << "t,x,xdot,y,ydot,z,zdot,ux,uy,uz\n";
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    os << fmt17(r.t[k]);
    for (int i = 0; i < 6; ++i) os << ',' << fmt17(r.x[k](i));
    for (int i = 0; i < 3; ++i) os << ',' << fmt17(r.u[k](i));
    os << '\n';
  }
}

void write_metrics_header(std::ostream& os) {
  os << "scenario,controller,ex,exdot,ey,eydot,ez,ezdot,rho_error_pct,effort,settle_time,converged,iterations\n";
}

void write_metrics_row(std::ostream& os, const RunResult& r) {
  os << r.scenario << ',' << r.controller;
  for (int i = 0; i < 6; ++i) os << ',' << fmt17(r.terminal_error(i));
  os << ',' << fmt17(r.rho_error_pct) << ',' << fmt17(r.effort) << ','
     << (r.settle_time ? fmt17(*r.settle_time) : std::string("nan")) << ',' << (r.converged ? 1 : 0) << ','
     << (r.iterations.empty() ? 0 : r.iterations.back().iteration) << '\n';
}

void write_iteration_csv(std::ostream& os, const std::vector<IterationLog>& log) {
  os << "iteration,ex,exdot,ey,eydot,ez,ezdot,rho_error_pct,effort\n";
  for (const auto& e : log) {
    os << e.iteration;
    for (int i = 0; i < 6; ++i) os << ',' << fmt17(e.terminal_error(i));
    os << ',' << fmt17(e.rho_error_pct) << ',' << fmt17(e.effort) << '\n';
  }
}

void write_nn_log_csv(std::ostream& os, const std::vector<NnStepLog>& log) {
  os << "t,E_x,E_xdot,E_y,E_ydot,E_z,E_zdot,dhat_x,dhat_y,dhat_z,w_norm,wc_norm\n";
  for (const auto& e : log) {
    os << fmt17(e.t);
    for (int i = 0; i < 6; ++i) os << ',' << fmt17(e.E(i));
    for (int i = 0; i < 3; ++i) os << ',' << fmt17(e.dhat(i));
    os << ',' << fmt17(e.w_norm) << ',' << fmt17(e.wc_norm) << '\n';
  }
}

CompareRow summarize(const RunResult& r) {
  CompareRow row;
  row.scenario = r.scenario;
  row.controller = r.controller;
  row.ok = true;
  row.terminal_error = r.terminal_error;
  row.rho_error_pct = r.rho_error_pct;
  row.effort = r.effort;
  row.settle_time = r.settle_time;
  row.iterations = r.iterations.empty() ? 0 : r.iterations.back().iteration;
  return row;
}

CompareReport compare(const std::vector<Scenario>& cells) {
  if (cells.empty()) throw DomainError("compare: no scenarios given");
  CompareReport rep;
  for (const auto& s : cells) {
    try {
      rep.rows.push_back(summarize(run_scenario(s)));
    } catch (const std::exception& e) {
      CompareRow row;
      row.scenario = s.name;
      row.controller = to_string(s.controller.kind);
      row.error = e.what();
      rep.rows.push_back(row);
    }
  }
  return rep;
}

void CompareReport::write_csv(std::ostream& os) const {
  os << "scenario,controller,status,ex,exdot,ey,eydot,ez,ezdot,rho_error_pct,effort,settle_time,iterations\n";
  for (const auto& r : rows) {
    os << r.scenario << ',' << r.controller << ',' << (r.ok ? "ok" : "failed");
    for (int i = 0; i < 6; ++i) os << ',' << (r.ok ? fmt17(r.terminal_error(i)) : std::string());
    os << ',' << (r.ok ? fmt17(r.rho_error_pct) : "") << ',' << (r.ok ? fmt17(r.effort) : "") << ','
       << (r.settle_time ? fmt17(*r.settle_time) : "") << ',' << r.iterations << '\n';
  }
}

void CompareReport::write_table(std::ostream& os) const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-22s %-14s %13s %13s %13s %10s %12s %9s\n", "scenario", "controller", "dx [km]",
                "dy [km]", "dz [km]", "rho_e [%]", "effort", "settle");
  os << buf;
  for (const auto& r : rows) {
    if (!r.ok) {
      std::snprintf(buf, sizeof buf, "%-22s %-14s failed: ", r.scenario.c_str(), r.controller.c_str());
      os << buf << r.error << '\n';
      continue;
    }
    std::snprintf(buf, sizeof buf, "%-22s %-14s %13.6g %13.6g %13.6g %10.4g %12.6g ", r.scenario.c_str(),
                  r.controller.c_str(), r.terminal_error(kX), r.terminal_error(kY), r.terminal_error(kZ),
                  r.rho_error_pct, r.effort);
    os << buf;
    if (r.settle_time)
      std::snprintf(buf, sizeof buf, "%9.0f\n", *r.settle_time);
    else
      std::snprintf(buf, sizeof buf, "%9s\n", "-");
    os << buf;
  }
}

}  // namespace sff
