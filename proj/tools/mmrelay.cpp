#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmrelay/channel.hpp"
#include "mmrelay/config.hpp"
#include "mmrelay/metrics.hpp"
#include "mmrelay/sim.hpp"
#include "mmrelay/sweep.hpp"
#include "mmrelay/validation.hpp"

using namespace mmrelay;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::string cache_dir;
  std::string table_file;
  int workers = 1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--set", c.overrides, "Override a field, key=value (repeatable)");
  app->add_option("--out", c.out, "Output file (default: stdout)");
  app->add_option("--workers", c.workers, "Worker threads (0: all cores)");
  app->add_option("--cache-dir", c.cache_dir, "Directory for cached success tables");
}

SceneConfig load(const Common& c) {
  SceneConfig cfg = c.config.empty() ? SceneConfig{} : load_config_file(c.config);
  for (const auto& o : c.overrides) apply_override(cfg, o);
  validate(cfg);
  return cfg;
}

SuccessTable obtain_table(const SceneConfig& cfg, const Common& c) {
  if (!c.table_file.empty()) {
    std::ifstream in(c.table_file);
    if (!in) throw std::runtime_error("cannot open table file " + c.table_file);
    SuccessTable t = SuccessTable::read_csv(in);
    if (t.hash() != channel_hash(cfg)) {
      throw std::runtime_error("table " + c.table_file + " was built for a different channel configuration");
    }
    if (t.n_ues() < cfg.n_ues) throw std::runtime_error("table " + c.table_file + " covers too few UEs");
    return t;
  }
  if (!c.cache_dir.empty()) return load_or_build_table(cfg, c.cache_dir, c.workers);
  return build_success_table(cfg, c.workers);
}

// Runs fn with the requested output stream.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
}

nlohmann::json to_json(const SceneConfig& cfg, const Evaluation& ev) {
  const auto& q = ev.queue;
  const auto& p = ev.perf;
  nlohmann::json j;
  const auto cols = parameter_columns();
  const auto vals = parameter_values(cfg);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (vals[i].empty() || vals[i] == "null") {
      j["config"][cols[i]] = nullptr;
    } else if (cols[i] == "n_ues" || cols[i] == "n_shadow_samples" || cols[i] == "seed") {
      j["config"][cols[i]] = std::stoull(vals[i]);
    } else {
      j["config"][cols[i]] = std::stod(vals[i]);
    }
  }
  j["queue"] = {{"q_tx", q.q_tx},       {"lambda0", q.lambda0}, {"lambda1", q.lambda1},
                {"a_r", q.a_r},         {"b_r", q.b_r},         {"mu_r", q.mu_r},
                {"q_rmin", q.q_rmin},   {"unstable_for_all", q.unstable_for_all},
                {"stable", q.stable},   {"drift", q.drift}};
  if (q.stable) {
    j["queue"]["p_empty"] = q.p_empty;
    j["queue"]["q_bar"] = q.q_bar;
    j["queue"]["lambda_r"] = q.lambda_r;
    j["queue"]["d_q"] = q.d_q;
    j["queue"]["d_rel"] = q.d_rel;
  }
  j["perf"] = {{"t_aggregate", p.t_aggregate}, {"t_ud_f", p.t_ud_f}, {"t_ud_b", p.t_ud_b},
               {"t_ur_f", p.t_ur_f},           {"t_ur_b", p.t_ur_b}, {"t_u", p.t_u},
               {"regime", to_string(p.regime)}};
  if (std::isfinite(p.d_total)) {
    j["perf"]["d_total"] = p.d_total;
    j["perf"]["d_breakdown"] = {{"ue_tx", p.d_breakdown.ue_tx},
                                {"relay_tx", p.d_breakdown.relay_tx},
                                {"queueing", p.d_breakdown.queueing},
                                {"alignment", p.d_breakdown.alignment}};
  } else {
    j["perf"]["d_total"] = nullptr;
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relay-assisted mm-wave random access: analysis, simulation and sweeps"};
  app.require_subcommand(1);

  Common common;

  auto* build = app.add_subcommand("build-table", "Estimate the success-probability table");
  add_common(build, common);

  std::string format = "csv";
  auto* analyze = app.add_subcommand("analyze", "Evaluate the analytical model for one configuration");
  add_common(analyze, common);
  analyze->add_option("--table", common.table_file, "Read the success table from this file");
  analyze->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  SimOptions sim;
  std::string mode = "table";
  std::string trace_path;
  bool with_analysis = false;
  auto* simulate = app.add_subcommand("simulate", "Run the slotted simulator");
  add_common(simulate, common);
  simulate->add_option("--table", common.table_file, "Read the success table from this file");
  simulate->add_option("--seed", sim.seed, "Simulation seed");
  simulate->add_option("--slots", sim.slots, "Number of slots")->check(CLI::PositiveNumber);
  simulate->add_option("--mode", mode, "table or physical")->check(CLI::IsMember({"table", "physical"}));
  simulate->add_option("--trace", trace_path, "Write a per-slot trace to this file");
  simulate->add_flag("--with-analysis", with_analysis, "Also emit the analytical row");

  std::vector<std::string> axes;
  std::string objective = "throughput";
  std::string extremum = "none";
  std::string extremum_out;
  bool sweep_sim = false;
  auto* sweep = app.add_subcommand("sweep", "Evaluate a one- or two-axis parameter grid");
  add_common(sweep, common);
  sweep->add_option("--axis", axes, "name=start:stop:step or name=v1,v2,... (outer axis first)")
      ->required();
  sweep->add_option("--objective", objective, "throughput or delay");
  sweep->add_option("--extremum", extremum, "max, min or none");
  sweep->add_option("--extremum-out", extremum_out, "Extremum trace file (default: stderr)");
  sweep->add_flag("--simulate", sweep_sim, "Also simulate every grid point");
  sweep->add_option("--seed", sim.seed, "Simulation seed");
  sweep->add_option("--slots", sim.slots, "Number of slots")->check(CLI::PositiveNumber);
  sweep->add_option("--mode", mode, "table or physical")->check(CLI::IsMember({"table", "physical"}));

  auto* validate_cmd = app.add_subcommand("validate", "Compare analytical sums with the oracles");
  add_common(validate_cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      SceneConfig cfg = load(common);
      SuccessTable t = common.cache_dir.empty() ? build_success_table(cfg, common.workers)
                                                : load_or_build_table(cfg, common.cache_dir, common.workers);
      with_output(common.out, [&](std::ostream& os) { t.write_csv(os); });
      return 0;
    }

    if (*analyze) {
      SceneConfig cfg = load(common);
      const Evaluation ev = evaluate(cfg, obtain_table(cfg, common));
      with_output(common.out, [&](std::ostream& os) {
        if (format == "json") {
          os << to_json(cfg, ev).dump(2) << '\n';
        } else {
          os << csv_header() << '\n' << csv_analysis_row(cfg, ev) << '\n';
        }
      });
      return 0;
    }

    if (*simulate) {
      SceneConfig cfg = load(common);
      sim.mode = parse_sim_mode(mode);
      const SuccessTable table = obtain_table(cfg, common);
      std::unique_ptr<std::ofstream> trace;
      if (!trace_path.empty()) {
        trace = std::make_unique<std::ofstream>(trace_path);
        if (!*trace) throw std::runtime_error("cannot write " + trace_path);
        sim.trace = trace.get();
      }
      const SimResult r = run_simulation(cfg, table, sim);
      with_output(common.out, [&](std::ostream& os) {
        os << csv_header() << '\n';
        if (with_analysis) os << csv_analysis_row(cfg, evaluate(cfg, table)) << '\n';
        os << csv_sim_row(cfg, r) << '\n';
      });
      return 0;
    }

    if (*sweep) {
      SweepSpec spec;
      spec.base = load(common);
      for (const auto& a : axes) spec.axes.push_back(parse_axis(a));
      spec.objective = parse_objective(objective);
      spec.extremum = parse_extremum(extremum);
      spec.simulate = sweep_sim;
      sim.mode = parse_sim_mode(mode);
      spec.sim = sim;
      spec.workers = common.workers;
      spec.cache_dir = common.cache_dir;
      const SweepResult result = run_sweep(spec);
      with_output(common.out, [&](std::ostream& os) { write_sweep_csv(result, os); });
      if (spec.extremum != Extremum::none) {
        if (extremum_out.empty()) {
          write_extremum_csv(spec, result, std::cerr);
        } else {
          with_output(extremum_out, [&](std::ostream& os) { write_extremum_csv(spec, result, os); });
        }
      }
      return 0;
    }

    if (*validate_cmd) {
      SceneConfig cfg = load(common);
      SceneConfig table_cfg = cfg;
      table_cfg.n_ues = std::max(3, cfg.n_ues);
      const SuccessTable table = common.cache_dir.empty()
                                     ? build_success_table(table_cfg, common.workers)
                                     : load_or_build_table(table_cfg, common.cache_dir, common.workers);
      bool ok = false;
      with_output(common.out, [&](std::ostream& os) { ok = print_validation(run_validation(cfg, table), os); });
      return ok ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
