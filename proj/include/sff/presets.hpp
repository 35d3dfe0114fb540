#pragma once

#include "sff/harness.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sff {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Reproduction {
  std::string id;
  std::vector<RunResult> runs;
  std::vector<Check> checks;

  bool ok() const;
};

std::vector<std::string> preset_ids();
std::string preset_description(const std::string& id);

// Every scenario a preset runs, in run order. Throws ConfigError for an
// unknown id.
std::vector<Scenario> preset_scenarios(const std::string& id);

// Runs a preset and evaluates its checks. adjust (optional) is applied to
// every scenario before it runs, e.g. for command-line overrides.
Reproduction reproduce(const std::string& id, const std::function<void(Scenario&)>& adjust = {});

// Settle times strictly increasing and efforts strictly decreasing along runs.
Check monotone_sweep(const std::vector<RunResult>& runs);

// Builds sweep runs of s over the control weights R = value * I.
std::vector<Scenario> r_sweep(const Scenario& s, const std::vector<double>& values);

}  // namespace sff
