#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mmrelay/channel.hpp"
#include "mmrelay/config.hpp"
#include "mmrelay/metrics.hpp"

namespace mmrelay {

enum class SimMode { table, physical };
SimMode parse_sim_mode(const std::string& text);
const char* to_string(SimMode m);

struct SimOptions {
  long long slots = 100000;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::table;
  double warmup_fraction = 0.1;
  /// Queue-size means over this many equal blocks of the whole run.
  int queue_blocks = 10;
  /// Per-slot trace (slot, queue size, UE states) when non-null.
  std::ostream* trace = nullptr;
};

struct SimResult {
  long long slots = 0;
  std::uint64_t seed = 0;
  // Measured after the warm-up.
  double t_empirical = 0.0;
  double d_empirical = 0.0;
  DelayBreakdown d_breakdown;
  double p_empty_empirical = 0.0;
  double q_bar_empirical = 0.0;
  double lambda_empirical = 0.0;
  double mu_empirical = 0.0;
  double relay_sojourn = 0.0;
  double q_tx_empirical = 0.0;
  long long delivered = 0;
  // Whole run.
  long long admissions_total = 0;
  long long relay_deliveries_total = 0;
  long long final_queue = 0;
  std::vector<double> queue_block_means;
};

/// Slotted simulation of cfg.n_ues saturated UEs and the relay. The table
/// supplies success probabilities in table mode; physical mode samples SINR.
SimResult run_simulation(const SceneConfig& cfg, const SuccessTable& table, const SimOptions& opt);

}  // namespace mmrelay
