#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mmrelay/config.hpp"
#include "mmrelay/numeric.hpp"

using namespace mmrelay;

TEST_CASE("defaults are valid and derived probabilities follow") {
  SceneConfig c;
  CHECK_NOTHROW(validate(c));
  c.q_uf = 0.3;
  c.q_ur = 0.8;
  CHECK(c.q_ub() == doctest::Approx(0.7));
  CHECK(c.q_um() == doctest::Approx(0.2));
  CHECK(c.br_beamwidth() == c.theta_rd);
}

TEST_CASE("degree aliases convert to radians") {
  SceneConfig c;
  set_field(c, "theta_rd_deg", "45");
  CHECK(c.theta_rd == doctest::Approx(std::numbers::pi / 4));
  CHECK(get_field(c, "theta_rd_deg") == 45.0);
  set_field(c, "theta_bw_b_deg", "60");
  CHECK(c.br_beamwidth() == doctest::Approx(std::numbers::pi / 3));
  set_field(c, "theta_bw_b", "null");
  CHECK(c.br_beamwidth() == c.theta_rd);
}

TEST_CASE("validation errors name the field") {
  SceneConfig c;
  c.q_u = 1.5;
  try {
    validate(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "q_u");
  }

  SceneConfig d;
  d.theta_bw_f = deg_to_rad(40);  // wider than the BR beam
  CHECK_THROWS_AS(validate(d), ConfigError);

  SceneConfig e;
  e.theta_rd = 4.0;
  CHECK_THROWS_AS(validate(e), ConfigError);

  SceneConfig f;
  CHECK_THROWS_AS(set_field(f, "no_such_field", "1"), ConfigError);
  CHECK_THROWS_AS(set_field(f, "q_u", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_override(f, "q_u"), ConfigError);
}

TEST_CASE("JSON config mirrors field names and rejects unknown keys") {
  std::istringstream in(R"({"n_ues": 4, "q_u": 0.25, "theta_rd_deg": 20, "gamma_db": 15})");
  SceneConfig c = load_config_json(in);
  CHECK(c.n_ues == 4);
  CHECK(c.q_u == 0.25);
  CHECK(c.gamma_db == 15.0);
  CHECK(rad_to_deg(c.theta_rd) == doctest::Approx(20.0));

  std::istringstream bad(R"({"q_u": 0.25, "qu": 1})");
  CHECK_THROWS_AS(load_config_json(bad), ConfigError);
}

TEST_CASE("parameter tuple covers every column") {
  SceneConfig c;
  CHECK(parameter_columns().size() == parameter_values(c).size());
  for (const auto& name : parameter_columns()) CHECK_NOTHROW(get_field(c, name));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456.789, -80.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.35) == "0.35");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("numeric helpers") {
  CHECK(binomial_coefficient(10, 3) == 120.0);
  CHECK(binomial_pmf(4, 2, 0.5) == doctest::Approx(0.375));
  CompensatedSum s;
  s += 1e16;
  for (int i = 0; i < 10; ++i) s += 1.0;
  s += -1e16;
  CHECK(s.value() == 10.0);
  const auto pmf = binomial_sum_pmf(3, 0.2, 2, 0.7);
  double total = 0;
  for (double p : pmf) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dbm_to_mw(30) == doctest::Approx(1000.0));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}
