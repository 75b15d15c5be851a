#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmrelay/channel.hpp"
#include "mmrelay/config.hpp"
#include "mmrelay/metrics.hpp"
#include "mmrelay/sim.hpp"

namespace mmrelay {

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

/// Parses "name=start:stop:step" (inclusive) or "name=v1,v2,...".
SweepAxis parse_axis(const std::string& text);

enum class Objective { throughput, delay };
enum class Extremum { none, max, min };
Objective parse_objective(const std::string& text);
Extremum parse_extremum(const std::string& text);

struct SweepSpec {
  SceneConfig base;
  std::vector<SweepAxis> axes;  // one or two; the first is the outer axis
  Objective objective = Objective::throughput;
  Extremum extremum = Extremum::none;
  bool simulate = false;
  SimOptions sim;
  int workers = 1;
  std::string cache_dir;  // empty: in-memory caching only
};

struct SweepPoint {
  SceneConfig cfg;
  std::optional<Evaluation> analysis;
  std::optional<SimResult> sim;
  std::string error;
};

/// Grid of points, outer axis major. Unknown axis names throw ConfigError;
/// values outside a parameter's domain leave the point's error set.
std::vector<SweepPoint> expand_grid(const SweepSpec& spec);

struct ExtremumEntry {
  double outer_value = 0.0;  // NaN with a single axis
  double best_value = 0.0;
  double objective = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<ExtremumEntry> extremum;
};

SweepResult run_sweep(const SweepSpec& spec);

/// Tables shared by configurations with equal channel hash. When only n_ues
/// differs, one table built for the largest N serves all of them.
class TableCache {
 public:
  explicit TableCache(std::string dir = {}, int workers = 1);
  std::shared_ptr<const SuccessTable> get(const SceneConfig& cfg);
  /// Builds every table needed by cfgs up front, up to `parallel` at a time.
  void prepare(const std::vector<SceneConfig>& cfgs, int parallel = 1);

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// CSV rows: full parameter tuple, analysis or simulation values, error text.
std::string csv_header();
std::string csv_analysis_row(const SceneConfig& cfg, const Evaluation& ev);
std::string csv_sim_row(const SceneConfig& cfg, const SimResult& sim);
std::string csv_error_row(const SceneConfig& cfg, const std::string& error);

void write_sweep_csv(const SweepResult& result, std::ostream& out);
void write_extremum_csv(const SweepSpec& spec, const SweepResult& result, std::ostream& out);

}  // namespace mmrelay
