#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "mmrelay/sweep.hpp"

using namespace mmrelay;

namespace {

SceneConfig cheap() {
  SceneConfig c;
  c.n_ues = 4;
  c.n_shadow_samples = 2000;
  return c;
}

std::size_t columns(const std::string& line) {
  std::size_t n = 1;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("axis parsing") {
  const SweepAxis r = parse_axis("q_uf=0:1:0.25");
  CHECK(r.name == "q_uf");
  CHECK(r.values == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  CHECK(parse_axis("q_uf=0:1:0.05").values.size() == 21);
  CHECK(parse_axis("q_uf=0:1:0.05").values[7] == 0.35);
  CHECK(parse_axis("n_ues=3,1,2").values == std::vector<double>{3, 1, 2});
  CHECK_THROWS_AS(parse_axis("q_uf"), ConfigError);
  CHECK_THROWS_AS(parse_axis("q_uf=1:0:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_axis("q_uf=0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_axis("q_uf=a,b"), ConfigError);
  CHECK(parse_objective("delay") == Objective::delay);
  CHECK(parse_extremum("min") == Extremum::min);
  CHECK_THROWS(parse_extremum("best"));
}

TEST_CASE("grid expansion") {
  SweepSpec spec;
  spec.base = cheap();
  spec.axes = {parse_axis("q_u=0.1,0.2"), parse_axis("q_uf=0,0.5,1")};
  const auto grid = expand_grid(spec);
  REQUIRE(grid.size() == 6);
  CHECK(grid[0].cfg.q_u == 0.1);
  CHECK(grid[2].cfg.q_uf == 1.0);
  CHECK(grid[3].cfg.q_u == 0.2);

  spec.axes = {parse_axis("no_such=1,2")};
  CHECK_THROWS_AS(expand_grid(spec), ConfigError);
  spec.axes.clear();
  CHECK_THROWS_AS(expand_grid(spec), ConfigError);
}

TEST_CASE("a single-point sweep equals a direct analysis") {
  SweepSpec spec;
  spec.base = cheap();
  spec.axes = {parse_axis("q_u=0.3")};
  const SweepResult r = run_sweep(spec);
  REQUIRE(r.points.size() == 1);
  REQUIRE(r.points[0].analysis.has_value());
  SceneConfig c = cheap();
  c.q_u = 0.3;
  const Evaluation direct = evaluate(c, build_success_table(c));
  CHECK(csv_analysis_row(r.points[0].cfg, *r.points[0].analysis) == csv_analysis_row(c, direct));
}

TEST_CASE("failed points are recorded and the sweep continues") {
  SweepSpec spec;
  spec.base = cheap();
  spec.axes = {parse_axis("q_u=0.5,1.5,0.2")};
  const SweepResult r = run_sweep(spec);
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[0].error.empty());
  CHECK(!r.points[1].error.empty());
  CHECK(r.points[2].analysis.has_value());

  std::ostringstream out;
  write_sweep_csv(r, out);
  std::istringstream in(out.str());
  std::string header, line;
  std::getline(in, header);
  CHECK(header == csv_header());
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(columns(line) == columns(header));
  }
  CHECK(rows == 3);
  CHECK(out.str().find("q_u: must lie in [0, 1]") != std::string::npos);
}

TEST_CASE("extremum trace and tie-breaking") {
  SweepSpec spec;
  spec.base = cheap();
  spec.base.q_uf = 1;
  spec.base.q_ur = 0;  // nothing reaches the relay, so q_r cannot matter
  spec.axes = {parse_axis("q_u=0.1,0.3"), parse_axis("q_r=0.9,0.4,0.6")};
  spec.extremum = Extremum::max;
  const SweepResult r = run_sweep(spec);
  REQUIRE(r.extremum.size() == 2);
  for (const auto& e : r.extremum) CHECK(e.best_value == 0.4);

  spec.axes = {parse_axis("q_u=0.05:0.95:0.1")};
  spec.base = cheap();
  spec.objective = Objective::throughput;
  const SweepResult one = run_sweep(spec);
  REQUIRE(one.extremum.size() == 1);
  double best = -1;
  for (const auto& p : one.points) best = std::max(best, p.analysis->perf.t_aggregate);
  CHECK(one.extremum[0].objective == best);
  CHECK(std::isnan(one.extremum[0].outer_value));

  std::ostringstream out;
  write_extremum_csv(spec, one, out);
  CHECK(out.str().rfind("outer,best_q_u,throughput\n", 0) == 0);
}

TEST_CASE("an n_ues sweep shares one table") {
  const auto dir = std::filesystem::temp_directory_path() / "mmrelay-sweep-cache";
  std::filesystem::remove_all(dir);
  SweepSpec spec;
  spec.base = cheap();
  spec.axes = {parse_axis("n_ues=1:6:1")};
  spec.cache_dir = dir.string();
  spec.workers = 3;
  const SweepResult r = run_sweep(spec);
  for (const auto& p : r.points) CHECK(p.error.empty());
  CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);

  // Same numbers as sequential evaluation against a table built for N=6.
  SceneConfig big = cheap();
  big.n_ues = 6;
  const SuccessTable t = build_success_table(big);
  for (const auto& p : r.points) {
    CHECK(p.analysis->perf.t_aggregate == evaluate(p.cfg, t).perf.t_aggregate);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("simulated rows carry source and seed") {
  SweepSpec spec;
  spec.base = cheap();
  spec.axes = {parse_axis("q_u=0.2")};
  spec.simulate = true;
  spec.sim.slots = 5000;
  spec.sim.seed = 77;
  const SweepResult r = run_sweep(spec);
  REQUIRE(r.points[0].sim.has_value());
  const std::string row = csv_sim_row(r.points[0].cfg, *r.points[0].sim);
  CHECK(row.find(",sim,77,5000,") != std::string::npos);
  CHECK(columns(row) == columns(csv_header()));
}
