// sff: command-line driver for the formation-flying controllers.
//
// Exit codes: 0 success, 1 a run finished but its criterion failed,
// 2 bad input or a run error.

#include "sff/config.hpp"
#include "sff/presets.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace sff;

namespace {

struct Overrides {
  std::optional<double> dt, tf, tol_pct;
  std::optional<int> max_iter;
  std::optional<std::string> j2;
  std::optional<long> seed;  // reserved; nothing here is random

  void apply(Scenario& s) const {
    if (dt) s.dt = *dt;
    if (tf) s.tf = *tf;
    if (max_iter) s.controller.mpsp.max_iter = s.controller.gmpsp.max_iter = *max_iter;
    if (tol_pct) s.controller.mpsp.tol_rho_pct = s.controller.gmpsp.tol_rho_pct = *tol_pct;
    if (j2) s.gravity.j2_enabled = *j2 == "on";
  }
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  return os;
}

std::string stem(std::size_t i, const RunResult& r) {
  return std::to_string(i) + "_" + r.scenario + "_" + r.controller;
}

void write_run(const fs::path& dir, const std::string& name, const RunResult& r) {
  auto tr = open_out(dir / (name + "_trajectory.csv"));
  write_trajectory_csv(tr, r);
  if (!r.iterations.empty()) {
    auto it = open_out(dir / (name + "_iterations.csv"));
    write_iteration_csv(it, r.iterations);
  }
  if (!r.nn_log.empty()) {
    auto nn = open_out(dir / (name + "_nn.csv"));
    write_nn_log_csv(nn, r.nn_log);
  }
}

void write_metrics(const fs::path& dir, const std::vector<RunResult>& runs) {
  auto os = open_out(dir / "metrics.csv");
  write_metrics_header(os);
  for (const auto& r : runs) write_metrics_row(os, r);
}

void print_table(const std::vector<RunResult>& runs) {
  CompareReport rep;
  for (const auto& r : runs) rep.rows.push_back(summarize(r));
  rep.write_table(std::cout);
}

// Machine-readable check summary: one "PASS|FAIL <name>: <detail>" line each.
int report_checks(const fs::path& dir, const std::vector<Check>& checks) {
  auto os = open_out(dir / "checks.csv");
  os << "check,status,detail\n";
  bool ok = true;
  for (const auto& c : checks) {
    os << '"' << c.name << "\"," << (c.pass ? "PASS" : "FAIL") << ",\"" << c.detail << "\"\n";
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

Scenario load(const std::string& path, const Overrides& ov) {
  Scenario s = parse_config(path);
  ov.apply(s);
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(path + " (after overrides): " + e.what());
  }
  return s;
}

int cmd_run(const std::string& path, const fs::path& out, const Overrides& ov) {
  const Scenario s = load(path, ov);
  const RunResult r = run_scenario(s);
  fs::create_directories(out);
  write_run(out, stem(0, r), r);
  write_metrics(out, {r});
  print_table({r});
  if (!r.converged) {
    std::cout << "FAIL " << r.controller << ": iteration limit reached with rho_e " << r.rho_error_pct << "%\n";
    return 1;
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const fs::path& out, const Overrides& ov) {
  std::vector<Scenario> cells;
  for (const auto& p : paths) cells.push_back(load(p, ov));
  const CompareReport rep = compare(cells);
  fs::create_directories(out);
  auto os = open_out(out / "compare.csv");
  rep.write_csv(os);
  rep.write_table(std::cout);
  for (const auto& row : rep.rows)
    if (!row.ok) return 1;
  return 0;
}

int cmd_sweep(const std::string& path, const std::vector<double>& values, const fs::path& out, const Overrides& ov) {
  const Scenario s = load(path, ov);
  std::vector<RunResult> runs;
  for (const Scenario& c : r_sweep(s, values)) runs.push_back(run_scenario(c));
  fs::create_directories(out);
  for (std::size_t i = 0; i < runs.size(); ++i) write_run(out, stem(i, runs[i]), runs[i]);
  write_metrics(out, runs);
  print_table(runs);
  return report_checks(out, {monotone_sweep(runs)});
}

int cmd_reproduce(const std::string& id, const fs::path& out, const Overrides& ov) {
  const auto scenarios = preset_scenarios(id);  // throws on an unknown id
  fs::create_directories(out);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    Scenario s = scenarios[i];
    ov.apply(s);
    auto os = open_out(out / (std::to_string(i) + "_" + s.name + "_" + to_string(s.controller.kind) + ".ini"));
    os << serialize_config(s);
  }
  const Reproduction rep = reproduce(id, [&](Scenario& s) { ov.apply(s); });
  for (std::size_t i = 0; i < rep.runs.size(); ++i) write_run(out, stem(i, rep.runs[i]), rep.runs[i]);
  write_metrics(out, rep.runs);
  std::cout << id << ": " << preset_description(id) << "\n";
  print_table(rep.runs);
  return report_checks(out, rep.checks);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite formation-flying control: LQR, SDRE, MPSP, G-MPSP, NN-LQR"};
  app.require_subcommand(1);

  std::string out = "sff_out";
  Overrides ov;
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--dt", ov.dt, "time step [s]");
  app.add_option("--tf", ov.tf, "final time [s]");
  app.add_option("--max-iter", ov.max_iter, "iteration limit for MPSP/G-MPSP");
  app.add_option("--tol-pct", ov.tol_pct, "rho error tolerance [%] for MPSP/G-MPSP");
  app.add_option("--j2", ov.j2, "J2 in the truth plant")->check(CLI::IsMember({"on", "off"}));
  app.add_option("--seed", ov.seed, "reserved");

  std::string config;
  auto* run = app.add_subcommand("run", "run one scenario file");
  run->add_option("config", config, "scenario file")->required();

  std::vector<std::string> configs;
  auto* cmp = app.add_subcommand("compare", "run several scenario files and tabulate");
  cmp->add_option("configs", configs, "scenario files")->required();

  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep-r", "sweep the control weight R = v * I");
  sweep->add_option("config", config, "scenario file")->required();
  sweep->add_option("--values", values, "R multipliers")->required()->delimiter(',');

  std::string id;
  auto* rep = app.add_subcommand("reproduce", "run a built-in preset and check it");
  rep->add_option("id", id, "preset id")->required();
  bool list = false;
  app.add_subcommand("presets", "list preset ids")->callback([&] { list = true; });

  for (auto* sc : app.get_subcommands({})) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list) {
      for (const auto& p : preset_ids()) std::cout << p << "  " << preset_description(p) << "\n";
      return 0;
    }
    if (*run) return cmd_run(config, out, ov);
    if (*cmp) return cmd_compare(configs, out, ov);
    if (*sweep) return cmd_sweep(config, values, out, ov);
    if (*rep) return cmd_reproduce(id, out, ov);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
