#include "mmrelay/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>

#include "json.hpp"

namespace mmrelay {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

namespace {

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void require_probability(double v, const char* field) {
  require(std::isfinite(v) && v >= 0.0 && v <= 1.0, field, "must lie in [0, 1]");
}

double parse_double(std::string_view key, std::string_view text) {
  std::string s(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(key), "not a number: '" + s + "'");
  }
}

long long parse_integer(std::string_view key, std::string_view text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    // Accept integral floating text such as "10.0" coming from sweeps.
    const double d = parse_double(key, text);
    if (d != std::floor(d)) {
      throw ConfigError(std::string(key), "not an integer: '" + std::string(text) + "'");
    }
    return static_cast<long long>(d);
  }
  return v;
}

struct FieldAccess {
  std::function<void(SceneConfig&, std::string_view key, std::string_view)> set;
  std::function<double(const SceneConfig&)> get;
};

template <typename Member>
FieldAccess real_field(Member SceneConfig::*m) {
  return {[m](SceneConfig& c, std::string_view k, std::string_view v) { c.*m = parse_double(k, v); },
          [m](const SceneConfig& c) { return c.*m; }};
}

// Degrees read back from radians, snapped so 30 prints as 30.
double readable_deg(double rad) { return std::round(rad_to_deg(rad) * 1e9) / 1e9; }

FieldAccess angle_deg_field(double SceneConfig::*m) {
  return {[m](SceneConfig& c, std::string_view k, std::string_view v) {
            c.*m = deg_to_rad(parse_double(k, v));
          },
          [m](const SceneConfig& c) { return readable_deg(c.*m); }};
}

const std::map<std::string, FieldAccess, std::less<>>& field_table() {
  static const std::map<std::string, FieldAccess, std::less<>> table = [] {
    std::map<std::string, FieldAccess, std::less<>> t;
    t["n_ues"] = {[](SceneConfig& c, std::string_view k, std::string_view v) {
                    c.n_ues = static_cast<int>(parse_integer(k, v));
                  },
                  [](const SceneConfig& c) { return static_cast<double>(c.n_ues); }};
    t["d_ud"] = real_field(&SceneConfig::d_ud);
    t["d_ur"] = real_field(&SceneConfig::d_ur);
    t["theta_rd"] = real_field(&SceneConfig::theta_rd);
    t["theta_rd_deg"] = angle_deg_field(&SceneConfig::theta_rd);
    t["theta_bw_f"] = real_field(&SceneConfig::theta_bw_f);
    t["theta_bw_f_deg"] = angle_deg_field(&SceneConfig::theta_bw_f);
    t["theta_bw_b"] = {[](SceneConfig& c, std::string_view k, std::string_view v) {
                         if (v == "null" || v.empty()) {
                           c.theta_bw_b.reset();
                         } else {
                           c.theta_bw_b = parse_double(k, v);
                         }
                       },
                       [](const SceneConfig& c) { return c.br_beamwidth(); }};
    t["theta_bw_b_deg"] = {[](SceneConfig& c, std::string_view k, std::string_view v) {
                             if (v == "null" || v.empty()) {
                               c.theta_bw_b.reset();
                             } else {
                               c.theta_bw_b = deg_to_rad(parse_double(k, v));
                             }
                           },
                           [](const SceneConfig& c) { return readable_deg(c.br_beamwidth()); }};
    t["fc_ghz"] = real_field(&SceneConfig::fc_ghz);
    t["h_ap"] = real_field(&SceneConfig::h_ap);
    t["h_ue"] = real_field(&SceneConfig::h_ue);
    t["p_t_dbm"] = real_field(&SceneConfig::p_t_dbm);
    t["p_n_dbm"] = real_field(&SceneConfig::p_n_dbm);
    t["gamma_db"] = real_field(&SceneConfig::gamma_db);
    t["alpha"] = real_field(&SceneConfig::alpha);
    t["beta"] = real_field(&SceneConfig::beta);
    t["sigma_e_deg"] = real_field(&SceneConfig::sigma_e_deg);
    t["q_u"] = real_field(&SceneConfig::q_u);
    t["q_uf"] = real_field(&SceneConfig::q_uf);
    t["q_ur"] = real_field(&SceneConfig::q_ur);
    t["q_r"] = real_field(&SceneConfig::q_r);
    t["d_a"] = real_field(&SceneConfig::d_a);
    t["d_a_br"] = {[](SceneConfig& c, std::string_view k, std::string_view v) {
                     if (v == "null" || v.empty()) {
                       c.d_a_br.reset();
                     } else {
                       c.d_a_br = parse_double(k, v);
                     }
                   },
                   [](const SceneConfig& c) { return c.d_a_br.value_or(c.d_a); }};
    t["n_shadow_samples"] = {[](SceneConfig& c, std::string_view k, std::string_view v) {
                               c.n_shadow_samples = static_cast<int>(parse_integer(k, v));
                             },
                             [](const SceneConfig& c) {
                               return static_cast<double>(c.n_shadow_samples);
                             }};
    t["seed"] = {[](SceneConfig& c, std::string_view k, std::string_view v) {
                   const long long s = parse_integer(k, v);
                   if (s < 0) throw ConfigError(std::string(k), "must be non-negative");
                   c.seed = static_cast<std::uint64_t>(s);
                 },
                 [](const SceneConfig& c) { return static_cast<double>(c.seed); }};
    return t;
  }();
  return table;
}

const FieldAccess& lookup(std::string_view key) {
  const auto& t = field_table();
  auto it = t.find(key);
  if (it == t.end()) throw ConfigError(std::string(key), "unknown parameter");
  return it->second;
}

}  // namespace

void validate(const SceneConfig& c) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  require(c.n_ues >= 1, "n_ues", "must be a positive integer");
  require(std::isfinite(c.d_ud) && c.d_ud > 0.0, "d_ud", "must be positive");
  require(std::isfinite(c.d_ur) && c.d_ur > 0.0, "d_ur", "must be positive");
  require(c.theta_rd > 0.0 && c.theta_rd <= std::numbers::pi, "theta_rd", "must lie in (0, pi]");
  require(c.theta_bw_f > 0.0 && c.theta_bw_f <= two_pi, "theta_bw_f", "must lie in (0, 2pi]");
  require(c.br_beamwidth() >= c.theta_bw_f && c.br_beamwidth() <= two_pi, "theta_bw_b",
          "must satisfy theta_bw_f <= theta_bw_b <= 2pi");
  require(std::isfinite(c.fc_ghz) && c.fc_ghz > 0.0, "fc_ghz", "must be positive");
  require(std::isfinite(c.h_ap) && c.h_ap > 0.0, "h_ap", "must be positive");
  require(std::isfinite(c.h_ue) && c.h_ue > 0.0, "h_ue", "must be positive");
  require(std::isfinite(c.p_t_dbm), "p_t_dbm", "must be finite");
  require(std::isfinite(c.p_n_dbm), "p_n_dbm", "must be finite");
  require(!std::isnan(c.gamma_db), "gamma_db", "must be a number");
  require_probability(c.alpha, "alpha");
  require_probability(c.beta, "beta");
  require(std::isfinite(c.sigma_e_deg) && c.sigma_e_deg >= 0.0, "sigma_e_deg",
          "must be non-negative");
  require_probability(c.q_u, "q_u");
  require_probability(c.q_uf, "q_uf");
  require_probability(c.q_ur, "q_ur");
  require_probability(c.q_r, "q_r");
  require(std::isfinite(c.d_a) && c.d_a >= 0.0, "d_a", "must be non-negative");
  require(!c.d_a_br || (std::isfinite(*c.d_a_br) && *c.d_a_br >= 0.0), "d_a_br",
          "must be non-negative");
  require(c.n_shadow_samples >= 1, "n_shadow_samples", "must be a positive integer");
  const double d_rd2 = c.d_ud * c.d_ud + c.d_ur * c.d_ur - 2.0 * c.d_ud * c.d_ur * std::cos(c.theta_rd);
  require(d_rd2 > 0.0, "theta_rd", "relay coincides with the access point");
}

void set_field(SceneConfig& cfg, std::string_view key, std::string_view value) {
  lookup(key).set(cfg, key, value);
}

void apply_override(SceneConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError(std::string(assignment), "override must have the form key=value");
  }
  set_field(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

double get_field(const SceneConfig& cfg, std::string_view key) { return lookup(key).get(cfg); }

const std::vector<std::string>& parameter_columns() {
  static const std::vector<std::string> cols = {
      "n_ues",  "d_ud",  "d_ur",        "theta_rd_deg", "theta_bw_f_deg", "theta_bw_b_deg",
      "fc_ghz", "h_ap",  "h_ue",        "p_t_dbm",      "p_n_dbm",        "gamma_db",
      "alpha",  "beta",  "sigma_e_deg", "q_u",          "q_uf",           "q_ur",
      "q_r",    "d_a",   "d_a_br",      "n_shadow_samples", "seed"};
  return cols;
}

std::vector<std::string> parameter_values(const SceneConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& col : parameter_columns()) {
    if (col == "n_ues" || col == "n_shadow_samples") {
      out.push_back(std::to_string(static_cast<long long>(get_field(cfg, col))));
    } else if (col == "seed") {
      out.push_back(std::to_string(cfg.seed));
    } else {
      out.push_back(format_double(get_field(cfg, col)));
    }
  }
  return out;
}

SceneConfig load_config_json(std::istream& in, SceneConfig base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config", "top level must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (value.is_string()) {
      set_field(base, key, value.get<std::string>());
    } else if (value.is_number() || value.is_null()) {
      set_field(base, key, value.is_null() ? std::string("null") : value.dump());
    } else {
      throw ConfigError(key, "expected a number");
    }
  }
  return base;
}

SceneConfig load_config_file(const std::string& path, SceneConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  return load_config_json(in, std::move(base));
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest text that round-trips.
  for (int prec = 6; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

}  // namespace mmrelay
