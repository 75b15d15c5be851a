#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mmrelay/channel.hpp"
#include "mmrelay/config.hpp"
#include "mmrelay/queueing.hpp"

namespace mmrelay {

struct ValidationCheck {
  std::string name;
  int n = 0;
  std::string variant;  // which strategy mix was used
  double error = 0.0;
  double tolerance = 0.0;
  bool pass() const { return error <= tolerance; }
};

/// Largest absolute deviations between the analytical sums and the
/// enumeration oracle for one table, mix and N (N <= 6).
std::vector<ValidationCheck> oracle_checks(const SuccessTable& table, const StrategyMix& mix, int n,
                                           const std::string& variant = "cfg");

/// Closed forms against numeric references at N = cfg.n_ues: stationary
/// solver, delay recursion, flow conservation and drift.
std::vector<ValidationCheck> model_checks(const SceneConfig& cfg, const SuccessTable& table);

/// Full matrix for cfg: oracle checks for N = 1..3 (cfg mix and a mixed-strategy
/// variant) and model checks at cfg.n_ues. The table must cover max(3, cfg.n_ues).
std::vector<ValidationCheck> run_validation(const SceneConfig& cfg, const SuccessTable& table);

/// Prints one line per check; returns true when all pass.
bool print_validation(const std::vector<ValidationCheck>& checks, std::ostream& out);

}  // namespace mmrelay
