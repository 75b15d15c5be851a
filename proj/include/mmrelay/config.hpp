#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmrelay {

/// Invalid configuration value; field() names the offending parameter.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Geometry, radio, antenna and protocol parameters of one scenario.
/// Angles are radians except sigma_e_deg. q_ub and q_um are always derived.
struct SceneConfig {
  int n_ues = 10;
  double d_ud = 50.0;
  double d_ur = 30.0;
  double theta_rd = deg_to_rad(30.0);
  double theta_bw_f = deg_to_rad(5.0);
  std::optional<double> theta_bw_b;  // unset: follows theta_rd
  double fc_ghz = 30.0;
  double h_ap = 10.0;
  double h_ue = 1.5;
  double p_t_dbm = 24.0;
  double p_n_dbm = -80.0;
  double gamma_db = 10.0;
  double alpha = 0.1;
  double beta = 0.0;
  double sigma_e_deg = 0.0;
  double q_u = 0.1;
  double q_uf = 0.5;
  double q_ur = 0.5;
  double q_r = 1.0;
  double d_a = 0.0;
  std::optional<double> d_a_br;  // unset: same as d_a
  int n_shadow_samples = 100000;
  std::uint64_t seed = 1;

  double q_ub() const { return 1.0 - q_uf; }
  double q_um() const { return 1.0 - q_ur; }
  double br_beamwidth() const { return theta_bw_b.value_or(theta_rd); }
  double sigma_e() const { return sigma_e_deg * std::numbers::pi / 180.0; }
};

/// Throws ConfigError on the first violated invariant.
void validate(const SceneConfig& cfg);

/// Assigns one field from its textual value. Angle fields also accept a
/// "_deg" suffixed alias (theta_rd_deg, theta_bw_f_deg, theta_bw_b_deg).
void set_field(SceneConfig& cfg, std::string_view key, std::string_view value);

/// Applies a "key=value" override.
void apply_override(SceneConfig& cfg, std::string_view assignment);

/// Numeric value of a field (accepts the same names as set_field).
double get_field(const SceneConfig& cfg, std::string_view key);

/// Column names of the canonical parameter tuple, in output order.
const std::vector<std::string>& parameter_columns();

/// Values matching parameter_columns(), formatted for CSV.
std::vector<std::string> parameter_values(const SceneConfig& cfg);

/// Reads a JSON object whose keys are field names. Unknown keys are errors.
SceneConfig load_config_json(std::istream& in, SceneConfig base = {});
SceneConfig load_config_file(const std::string& path, SceneConfig base = {});

/// Round-trippable text for a double.
std::string format_double(double v);

}  // namespace mmrelay
