#include "sff/presets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace sff {

namespace {

double deg(double d) { return d * M_PI / 180.0; }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

// Chief at a = 10000 km, true anomaly 10 deg; formations with slopes 1 -> 1.5.
Scenario base(const std::string& name, ControllerKind kind, double e, double inc_deg, double rho0, double rho1,
              double th0_deg, double th1_deg, double tf) {
  Scenario s;
  s.name = name;
  s.chief.a = 10000.0;
  s.chief.e = e;
  s.chief.i = deg(inc_deg);
  s.chief.nu0 = deg(10.0);
  s.initial.rho = rho0;
  s.initial.theta = deg(th0_deg);
  s.initial.m_slope = 1.0;
  s.desired.rho = rho1;
  s.desired.theta = deg(th1_deg);
  s.desired.m_slope = 1.5;
  s.tf = tf;
  s.dt = 1.0;
  s.controller.kind = kind;
  return s;
}

Scenario with(Scenario s, ControllerKind kind) {
  s.controller.kind = kind;
  return s;
}

std::vector<Scenario> lqr_circular() { return {base("lqr-circular", ControllerKind::Lqr, 0.0, 0, 1, 10, 45, 60, 3000)}; }

std::vector<Scenario> lqr_eccentric() {
  return {base("lqr-circular", ControllerKind::Lqr, 0.0, 0, 1, 10, 45, 60, 3000),
          base("lqr-eccentric", ControllerKind::Lqr, 0.15, 0, 1, 10, 45, 60, 3000)};
}

std::vector<Scenario> mpsp_eccentric() {
  const Scenario s = base("mpsp-eccentric", ControllerKind::Mpsp, 0.15, 0, 0.5, 5, 45, 60, 2000);
  return {s, with(s, ControllerKind::FiniteSdre), with(s, ControllerKind::Lqr)};
}

std::vector<Scenario> mpsp_j2() {
  Scenario s = base("mpsp-j2", ControllerKind::Mpsp, 0.15, 60, 0.5, 5, 45, 60, 2000);
  s.gravity.j2_enabled = true;
  return {s, with(s, ControllerKind::FiniteSdre), with(s, ControllerKind::Lqr)};
}

std::vector<Scenario> gmpsp_j2() {
  Scenario s = base("gmpsp-j2", ControllerKind::Gmpsp, 0.1, 60, 10, 2.5, 45, 60, 2000);
  s.gravity.j2_enabled = true;
  return {s, with(s, ControllerKind::Mpsp), with(s, ControllerKind::FiniteSdre), with(s, ControllerKind::Lqr)};
}

std::vector<Scenario> fsdre_sdc_comp() {
  std::vector<Scenario> out;
  for (double e : {0.0, 0.05, 0.15})
    for (SdcVariant v : {SdcVariant::Sdc1, SdcVariant::Sdc2}) {
      Scenario s = base(fmt("fsdre-e%.2f", e) + (v == SdcVariant::Sdc1 ? "-sdc1" : "-sdc2"),
                        ControllerKind::FiniteSdre, e, 0, 10, 100, 5, 35, 2000);
      s.controller.sdc = v;
      out.push_back(s);
    }
  return out;
}

std::vector<Scenario> sdre_comp_r() {
  return r_sweep(base("sdre-comp-r", ControllerKind::Sdre, 0.0, 0, 5, 25, 45, 60, 15000), {1e8, 1e9, 1e10, 1e11});
}

std::vector<Scenario> sdre_infinite() {
  return {base("sdre-infinite", ControllerKind::Sdre, 0.15, 0, 5, 25, 45, 60, 5000)};
}

// Controller believes a circular 10000 km chief without J2; the truth plant
// runs the perturbed eccentric orbit.
std::vector<Scenario> nnlqr() {
  Scenario s = base("nnlqr", ControllerKind::NnLqr, 0.0, 0, 0.5, 5, 45, 60, 2000);
  ChiefOrbit truth = s.chief;
  truth.a = 11114.51658;
  truth.e = 0.5;
  s.truth_chief = truth;
  s.gravity.j2_enabled = true;
  return {with(s, ControllerKind::Lqr), s};
}

Check bound_each(const std::string& name, const Vec3& err, const Vec3& bound) {
  Check c{name, (err.array().abs() <= bound.array()).all(), ""};
  char buf[200];
  std::snprintf(buf, sizeof buf, "|dx|=%.3g<=%.3g |dy|=%.3g<=%.3g |dz|=%.3g<=%.3g", std::abs(err(0)), bound(0),
                std::abs(err(1)), bound(1), std::abs(err(2)), bound(2));
  c.detail = buf;
  return c;
}

// Iterations counted as control updates applied.
int updates(const RunResult& r) { return r.iterations.empty() ? 0 : r.iterations.back().iteration; }

std::vector<Check> eval_lqr_circular(const std::vector<RunResult>& r) {
  return {bound_each("lqr circular terminal errors within 5x reference",
                     r[0].terminal_position_error(), Vec3(0.0081, 0.0153, 0.033))};
}

std::vector<Check> eval_lqr_eccentric(const std::vector<RunResult>& r) {
  const double circ = r[0].terminal_position_error().norm();
  const double ecc = r[1].terminal_position_error().norm();
  return {{"lqr eccentric error >= 10x circular", ecc >= 10.0 * circ,
           fmt("eccentric %.4g km, circular %.4g km", ecc, circ) + fmt(", ratio %.3g", ecc / circ)}};
}

std::vector<Check> eval_mpsp_eccentric(const std::vector<RunResult>& r) {
  const RunResult& m = r[0];
  const RunResult& f = r[1];
  Check conv{"mpsp rho error < 0.5% within 10 updates", m.converged && m.rho_error_pct < 0.5 && updates(m) <= 10,
             fmt("rho_e %.4g%% after %.0f updates", m.rho_error_pct, updates(m))};
  Check err = bound_each("mpsp terminal errors <= 1e-2 km", m.terminal_position_error(), Vec3::Constant(1e-2));
  const double ratio = m.effort / f.effort;
  Check eff{"mpsp/fsdre effort ratio in [0.7, 1.0)", ratio >= 0.7 && ratio < 1.0,
            fmt("ratio %.4f", ratio) + fmt(" (mpsp %.5g, fsdre %.5g)", m.effort, f.effort)};
  return {conv, err, eff};
}

std::vector<Check> eval_mpsp_j2(const std::vector<RunResult>& r) {
  const double em = r[0].terminal_position_error().norm();
  const double ef = r[1].terminal_position_error().norm();
  return {bound_each("mpsp j2 terminal errors <= 1e-2 km", r[0].terminal_position_error(), Vec3::Constant(1e-2)),
          {"fsdre error >= 10x mpsp under j2", ef >= 10.0 * em, fmt("fsdre %.4g km, mpsp %.4g km", ef, em)}};
}

std::vector<Check> eval_gmpsp_j2(const std::vector<RunResult>& r) {
  const RunResult& g = r[0];
  const RunResult& m = r[1];
  Check conv{"gmpsp rho error < 1% within 10 updates", g.converged && g.rho_error_pct < 1.0 && updates(g) <= 10,
             fmt("rho_e %.4g%% after %.0f updates", g.rho_error_pct, updates(g))};
  Check err = bound_each("gmpsp terminal errors <= 2e-2 km", g.terminal_position_error(), Vec3::Constant(2e-2));
  const double diff = (g.x.back() - m.x.back()).norm();
  const double eg = g.terminal_error.norm();
  const double em = m.terminal_error.norm();
  Check cross{"mpsp/gmpsp terminal difference <= 5% of each error norm", diff <= 0.05 * std::min(eg, em),
              fmt("difference %.4g", diff) + fmt(", gmpsp error %.4g, mpsp error %.4g", eg, em)};
  return {conv, err, cross};
}

std::vector<Check> eval_fsdre_sdc(const std::vector<RunResult>& r) {
  const double c0 = r[0].terminal_position_error().norm(), c0b = r[1].terminal_position_error().norm();
  const double c15 = r[4].terminal_position_error().norm(), c15b = r[5].terminal_position_error().norm();
  const double agree = std::max(c0, c0b) / std::min(c0, c0b);
  return {{"sdc2 error >= 10x sdc1 at e = 0.15", c15b >= 10.0 * c15, fmt("sdc2 %.4g km, sdc1 %.4g km", c15b, c15)},
          {"sdc1 and sdc2 within 2x at e = 0", agree <= 2.0, fmt("sdc1 %.4g km, sdc2 %.4g km", c0, c0b)}};
}

std::vector<Check> eval_sdre_comp_r(const std::vector<RunResult>& r) {
  std::vector<Check> out{monotone_sweep(r)};
  const double target[4] = {1500, 2000, 5000, 7500};
  bool band = true;
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    const double st = r[i].settle_time ? *r[i].settle_time : NAN;
    band = band && r[i].settle_time && st >= 0.5 * target[i] && st <= 2.0 * target[i];
    detail += fmt(i ? ", %.0f" : "%.0f", st) + fmt(" in [%.0f, %.0f]", 0.5 * target[i], 2.0 * target[i]);
  }
  out.push_back({"settle times within [0.5x, 2x] of reference", band, detail});
  return out;
}

std::vector<Check> eval_sdre_infinite(const std::vector<RunResult>& r) {
  return {{"infinite sdre settles below 1% of commanded rho", r[0].settle_time.has_value(),
           r[0].settle_time ? fmt("settled at %.0f s", *r[0].settle_time) : "not settled"}};
}

std::vector<Check> eval_nnlqr(const std::vector<RunResult>& r) {
  const double el = r[0].terminal_position_error().norm();
  const double en = r[1].terminal_position_error().norm();
  return {{"lqr+nn error <= lqr error / 20", en * 20.0 <= el,
           fmt("lqr %.4g km, lqr+nn %.4g km", el, en) + fmt(", ratio %.3g", el / en)},
          bound_each("lqr+nn terminal errors <= 0.5 km", r[1].terminal_position_error(), Vec3::Constant(0.5))};
}

struct Preset {
  const char* description;
  std::vector<Scenario> (*scenarios)();
  std::vector<Check> (*evaluate)(const std::vector<RunResult>&);
};

const std::map<std::string, Preset>& registry() {
  static const std::map<std::string, Preset> m = {
      {"lqr-circular", {"LQR reconfiguration 1 -> 10 km, circular chief", lqr_circular, eval_lqr_circular}},
      {"lqr-eccentric", {"LQR on circular vs e = 0.15 chief", lqr_eccentric, eval_lqr_eccentric}},
      {"mpsp-eccentric",
       {"MPSP, finite-time SDRE and LQR, 0.5 -> 5 km, e = 0.15", mpsp_eccentric, eval_mpsp_eccentric}},
      {"mpsp-j2", {"MPSP vs finite-time SDRE with J2, i = 60 deg, e = 0.15", mpsp_j2, eval_mpsp_j2}},
      {"gmpsp-j2", {"G-MPSP and MPSP with J2, 10 -> 2.5 km, e = 0.1, i = 60 deg", gmpsp_j2, eval_gmpsp_j2}},
      {"fsdre-sdc-comp", {"finite-time SDRE, SDC1 vs SDC2, 10 -> 100 km, e = 0/0.05/0.15", fsdre_sdc_comp,
                          eval_fsdre_sdc}},
      {"sdre-comp-r", {"infinite-time SDRE control-weight sweep, 5 -> 25 km", sdre_comp_r, eval_sdre_comp_r}},
      {"sdre-infinite", {"infinite-time SDRE, 5 -> 25 km, e = 0.15", sdre_infinite, eval_sdre_infinite}},
      {"nnlqr", {"LQR vs LQR+NN on an uncertain eccentric chief with J2", nnlqr, eval_nnlqr}},
  };
  return m;
}

const Preset& lookup(const std::string& id) {
  auto it = registry().find(id);
  if (it == registry().end()) {
    std::string ids;
    for (const auto& [k, v] : registry()) ids += (ids.empty() ? "" : ", ") + k;
    throw ConfigError("unknown preset '" + id + "' (known: " + ids + ")");
  }
  return it->second;
}

}  // namespace

bool Reproduction::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<std::string> preset_ids() {
  std::vector<std::string> ids;
  for (const auto& [k, v] : registry()) ids.push_back(k);
  return ids;
}

std::string preset_description(const std::string& id) { return lookup(id).description; }

std::vector<Scenario> preset_scenarios(const std::string& id) { return lookup(id).scenarios(); }

Reproduction reproduce(const std::string& id, const std::function<void(Scenario&)>& adjust) {
  const Preset& p = lookup(id);
  Reproduction rep;
  rep.id = id;
  for (Scenario s : p.scenarios()) {
    if (adjust) adjust(s);
    rep.runs.push_back(run_scenario(s));
  }
  rep.checks = p.evaluate(rep.runs);
  return rep;
}

Check monotone_sweep(const std::vector<RunResult>& runs) {
  bool settle_up = true, effort_down = true;
  std::string detail;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    detail += (i ? "; " : "") + (r.settle_time ? fmt("settle %.0f", *r.settle_time) : std::string("unsettled")) +
              fmt(" effort %.4g", r.effort);
    if (i == 0) continue;
    const auto& p = runs[i - 1];
    settle_up = settle_up && p.settle_time && r.settle_time && *r.settle_time > *p.settle_time;
    effort_down = effort_down && r.effort < p.effort;
  }
  return {"settle time increasing and effort decreasing with R", settle_up && effort_down, detail};
}

std::vector<Scenario> r_sweep(const Scenario& s, const std::vector<double>& values) {
  if (values.empty()) throw DomainError("r sweep: no values given");
  std::vector<Scenario> out;
  for (double v : values) {
    if (!(v > 0.0)) throw DomainError("r sweep: values must be positive");
    Scenario c = s;
    c.controller.R = Mat3::Identity() * v;
    c.name = s.name + fmt("-R%.0e", v);
    out.push_back(c);
  }
  return out;
}

}  // namespace sff
