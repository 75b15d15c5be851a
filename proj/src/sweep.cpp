#include "mmrelay/sweep.hpp"

#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace mmrelay {

SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("axis", "expected name=start:stop:step or name=v1,v2,..., got '" + text + "'");
  }
  SweepAxis axis;
  axis.name = text.substr(0, eq);
  const std::string body = text.substr(eq + 1);
  const auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(axis.name, "bad axis value '" + s + "'");
    }
  };
  if (body.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(number(item));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw ConfigError(axis.name, "range must be start:stop:step with step > 0 and stop >= start");
    }
    const double span = (parts[1] - parts[0]) / parts[2];
    const auto steps = static_cast<long long>(std::floor(span + 1e-9));
    for (long long i = 0; i <= steps; ++i) {
      // Snap to the grid so that 0.05 steps print as 0.35, not 0.35000000000000003.
      const double v = parts[0] + static_cast<double>(i) * parts[2];
      axis.values.push_back(std::round(v * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) axis.values.push_back(number(item));
  }
  if (axis.values.empty()) throw ConfigError(axis.name, "axis has no values");
  return axis;
}

Objective parse_objective(const std::string& text) {
  if (text == "throughput") return Objective::throughput;
  if (text == "delay") return Objective::delay;
  throw ConfigError("objective", "expected throughput or delay");
}

Extremum parse_extremum(const std::string& text) {
  if (text == "none") return Extremum::none;
  if (text == "max") return Extremum::max;
  if (text == "min") return Extremum::min;
  throw ConfigError("extremum", "expected max, min or none");
}

std::vector<SweepPoint> expand_grid(const SweepSpec& spec) {
  if (spec.axes.empty() || spec.axes.size() > 2) {
    throw ConfigError("axis", "a sweep needs one or two axes");
  }
  for (const auto& a : spec.axes) {
    get_field(spec.base, a.name);  // rejects unknown names
    if (a.values.empty()) throw ConfigError(a.name, "axis has no values");
  }
  std::vector<SweepPoint> grid;
  const auto make = [&](double outer, std::optional<double> inner) {
    SweepPoint p;
    p.cfg = spec.base;
    try {
      set_field(p.cfg, spec.axes[0].name, format_double(outer));
      if (inner) set_field(p.cfg, spec.axes[1].name, format_double(*inner));
      validate(p.cfg);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
    grid.push_back(std::move(p));
  };
  for (double outer : spec.axes[0].values) {
    if (spec.axes.size() == 1) {
      make(outer, std::nullopt);
    } else {
      for (double inner : spec.axes[1].values) make(outer, inner);
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------

struct TableCache::Impl {
  std::string dir;
  int workers = 1;
  std::mutex mu;
  std::map<std::uint64_t, std::shared_future<std::shared_ptr<const SuccessTable>>> tables;
  std::map<std::uint64_t, int> wanted_n;  // largest N requested per hash
};

TableCache::TableCache(std::string dir, int workers) : impl_(std::make_shared<Impl>()) {
  impl_->dir = std::move(dir);
  impl_->workers = workers;
}

std::shared_ptr<const SuccessTable> TableCache::get(const SceneConfig& cfg) {
  const std::uint64_t key = channel_hash(cfg);
  std::shared_future<std::shared_ptr<const SuccessTable>> fut;
  std::promise<std::shared_ptr<const SuccessTable>> promise;
  bool builder = false;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->tables.find(key);
    if (it != impl_->tables.end()) {
      fut = it->second;
    } else {
      fut = promise.get_future().share();
      impl_->tables.emplace(key, fut);
      builder = true;
    }
  }
  if (builder) {
    SceneConfig c = cfg;
    {
      std::lock_guard<std::mutex> lock(impl_->mu);
      auto w = impl_->wanted_n.find(key);
      if (w != impl_->wanted_n.end()) c.n_ues = std::max(c.n_ues, w->second);
    }
    try {
      auto t = impl_->dir.empty() ? build_success_table(c, impl_->workers)
                                  : load_or_build_table(c, impl_->dir, impl_->workers);
      promise.set_value(std::make_shared<const SuccessTable>(std::move(t)));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  auto table = fut.get();
  if (table->n_ues() < cfg.n_ues) {
    // Rebuild for a larger N than anticipated; the smaller table stays valid.
    SceneConfig c = cfg;
    auto t = std::make_shared<const SuccessTable>(
        impl_->dir.empty() ? build_success_table(c, impl_->workers)
                           : load_or_build_table(c, impl_->dir, impl_->workers));
    std::promise<std::shared_ptr<const SuccessTable>> p;
    p.set_value(t);
    std::lock_guard<std::mutex> lock(impl_->mu);
    impl_->tables[key] = p.get_future().share();
    return t;
  }
  return table;
}

void TableCache::prepare(const std::vector<SceneConfig>& cfgs, int parallel) {
  std::vector<SceneConfig> reps;
  {
    std::lock_guard<std::mutex> lock(impl_->mu);
    for (const auto& c : cfgs) {
      const auto key = channel_hash(c);
      auto [it, inserted] = impl_->wanted_n.emplace(key, c.n_ues);
      if (inserted) {
        reps.push_back(c);
      } else {
        it->second = std::max(it->second, c.n_ues);
      }
    }
  }
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < reps.size(); i = next++) {
      try {
        get(reps[i]);
      } catch (const std::exception&) {
        // Stored in the cache; reported by the points that need the table.
      }
    }
  };
  const int threads = std::max(1, std::min<int>(parallel, static_cast<int>(reps.size())));
  if (threads == 1) {
    work();
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------

namespace {

double objective_value(const SweepPoint& p, Objective obj) {
  if (!p.analysis) return std::numeric_limits<double>::quiet_NaN();
  return obj == Objective::throughput ? p.analysis->perf.t_aggregate : p.analysis->perf.d_total;
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  SweepResult result;
  result.points = expand_grid(spec);
  const auto& grid = result.points;
  const int workers = spec.workers <= 0 ? static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))
                                        : spec.workers;
  TableCache cache(spec.cache_dir, 1);
  {
    std::vector<SceneConfig> valid;
    for (const auto& p : grid) {
      if (p.error.empty()) valid.push_back(p.cfg);
    }
    cache.prepare(valid, workers);
  }

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      SweepPoint& p = result.points[i];
      if (!p.error.empty()) continue;
      try {
        const auto table = cache.get(p.cfg);
        p.analysis = evaluate(p.cfg, *table);
        if (spec.simulate) {
          SimOptions o = spec.sim;
          o.trace = nullptr;
          p.sim = run_simulation(p.cfg, *table, o);
        }
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (spec.extremum != Extremum::none) {
    const bool two = spec.axes.size() == 2;
    const std::size_t inner = two ? spec.axes[1].values.size() : grid.size();
    const std::size_t outer = two ? spec.axes[0].values.size() : 1;
    const std::string& inner_name = two ? spec.axes[1].name : spec.axes[0].name;
    for (std::size_t o = 0; o < outer; ++o) {
      // Visit inner values in ascending order so ties go to the smallest one.
      std::vector<std::size_t> order(inner);
      for (std::size_t k = 0; k < inner; ++k) order[k] = o * inner + k;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return get_field(result.points[a].cfg, inner_name) < get_field(result.points[b].cfg, inner_name);
      });
      ExtremumEntry best;
      best.outer_value = two ? spec.axes[0].values[o] : std::numeric_limits<double>::quiet_NaN();
      bool found = false;
      for (std::size_t idx : order) {
        const double v = objective_value(result.points[idx], spec.objective);
        if (std::isnan(v)) continue;
        const bool better = !found || (spec.extremum == Extremum::max ? v > best.objective : v < best.objective);
        if (better) {
          best.objective = v;
          best.best_value = get_field(result.points[idx].cfg, inner_name);
          found = true;
        }
      }
      if (!found) {
        best.best_value = best.objective = std::numeric_limits<double>::quiet_NaN();
      }
      result.extremum.push_back(best);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "source",  "sim_seed", "sim_slots", "q_tx",     "lambda0",  "lambda1",     "a_r",
      "b_r",     "mu_r",     "q_rmin",    "stable",   "p_empty",  "q_bar",       "lambda_r",
      "d_q",     "d_rel",    "t_aggregate", "t_ud_f", "t_ud_b",   "t_ur_f",      "t_ur_b",
      "t_u",     "d_total",  "d_ue_tx",   "d_relay_tx", "d_queueing", "d_alignment", "regime",
      "error"};
  return cols;
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' ? ' ' : c);
  }
  return out + '"';
}

}  // namespace

std::string csv_header() {
  std::vector<std::string> cols = parameter_columns();
  const auto& r = result_columns();
  cols.insert(cols.end(), r.begin(), r.end());
  return join(cols);
}

std::string csv_analysis_row(const SceneConfig& cfg, const Evaluation& ev) {
  const auto& q = ev.queue;
  const auto& p = ev.perf;
  const auto f = format_double;
  std::vector<std::string> cells = parameter_values(cfg);
  const std::vector<std::string> rest = {
      "analysis", "", "", f(q.q_tx), f(q.lambda0), f(q.lambda1), f(q.a_r), f(q.b_r), f(q.mu_r),
      q.unstable_for_all ? "inf" : f(q.q_rmin), q.stable ? "1" : "0", f(q.p_empty), f(q.q_bar),
      f(q.lambda_r), f(q.d_q), f(q.d_rel), f(p.t_aggregate), f(p.t_ud_f), f(p.t_ud_b), f(p.t_ur_f),
      f(p.t_ur_b), f(p.t_u), f(p.d_total), f(p.d_breakdown.ue_tx), f(p.d_breakdown.relay_tx),
      f(p.d_breakdown.queueing), f(p.d_breakdown.alignment), to_string(p.regime), ""};
  cells.insert(cells.end(), rest.begin(), rest.end());
  return join(cells);
}

std::string csv_sim_row(const SceneConfig& cfg, const SimResult& s) {
  const auto f = format_double;
  std::vector<std::string> cells = parameter_values(cfg);
  const std::vector<std::string> rest = {
      "sim", std::to_string(s.seed), std::to_string(s.slots), f(s.q_tx_empirical), "", "", "", "",
      f(s.mu_empirical), "", "", f(s.p_empty_empirical), f(s.q_bar_empirical), f(s.lambda_empirical),
      "", f(s.relay_sojourn), f(s.t_empirical), "", "", "", "", "", f(s.d_empirical),
      f(s.d_breakdown.ue_tx), f(s.d_breakdown.relay_tx), f(s.d_breakdown.queueing),
      f(s.d_breakdown.alignment), "", ""};
  cells.insert(cells.end(), rest.begin(), rest.end());
  return join(cells);
}

std::string csv_error_row(const SceneConfig& cfg, const std::string& error) {
  std::vector<std::string> cells = parameter_values(cfg);
  cells.push_back("analysis");
  for (std::size_t i = 1; i + 1 < result_columns().size(); ++i) cells.emplace_back();
  cells.push_back(quote(error));
  return join(cells);
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
  out << csv_header() << '\n';
  for (const auto& p : result.points) {
    if (!p.error.empty()) {
      out << csv_error_row(p.cfg, p.error) << '\n';
      continue;
    }
    out << csv_analysis_row(p.cfg, *p.analysis) << '\n';
    if (p.sim) out << csv_sim_row(p.cfg, *p.sim) << '\n';
  }
}

void write_extremum_csv(const SweepSpec& spec, const SweepResult& result, std::ostream& out) {
  const bool two = spec.axes.size() == 2;
  out << (two ? spec.axes[0].name : std::string("outer")) << ",best_"
      << (two ? spec.axes[1].name : spec.axes[0].name) << ','
      << (spec.objective == Objective::throughput ? "throughput" : "delay") << '\n';
  for (const auto& e : result.extremum) {
    out << (two ? format_double(e.outer_value) : std::string("")) << ',' << format_double(e.best_value)
        << ',' << format_double(e.objective) << '\n';
  }
}

}  // namespace mmrelay
