#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "mmrelay/config.hpp"

namespace mmrelay {

enum class Link { ue_to_ap, ue_to_relay, relay_to_ap };
enum class Scheme { FD, BR };

const char* to_string(Link link);
const char* to_string(Scheme scheme);
Link parse_link(const std::string& text);
Scheme parse_scheme(const std::string& text);

/// Interference seen by one intended transmission.
/// n_fd counts FD transmissions aimed at the same receiver, n_br counts BR
/// transmissions (they reach both receivers). relay_active means the relay
/// transmits in the slot: interference at the mmAP, self-interference at the
/// relay.
struct InterferenceScenario {
  Link link = Link::ue_to_ap;
  Scheme scheme = Scheme::FD;
  int n_fd = 0;
  int n_br = 0;
  bool relay_active = false;

  friend bool operator==(const InterferenceScenario&, const InterferenceScenario&) = default;
};

std::string describe(const InterferenceScenario& s);

/// Throws std::invalid_argument if the scenario cannot occur with n_ues UEs.
void check_scenario(const InterferenceScenario& s, int n_ues);

struct Geometry {
  double d_ud = 0.0;
  double d_ur = 0.0;
  double d_rd = 0.0;
  double d3_ud = 0.0;
  double d3_ur = 0.0;
  double d3_rd = 0.0;
};

/// Relay is mounted at the mmAP height, so only UE links get a height offset.
Geometry derive_geometry(const SceneConfig& cfg);

/// Mean UMi street-canyon path loss in dB.
double path_loss_db(double d3d, bool los, const SceneConfig& cfg);
double shadowing_sigma_db(bool los);
double los_probability(double d2d);

double beam_gain(double theta_bw);
double gain_success_prob(double theta_bw, double sigma_e);

/// One realized link: LOS state, shadowing and misalignment outcomes.
struct LinkDraw {
  bool los = true;
  double shadow_db = 0.0;
  bool tx_aligned = true;
  bool rx_aligned = true;
};

/// Realization for one receiver. fd_interferers and br_interferers must hold
/// at least n_fd and n_br entries; relay is used when the relay interferes at
/// the mmAP.
struct ShadowAndLosRealization {
  LinkDraw desired;
  std::vector<LinkDraw> fd_interferers;
  std::vector<LinkDraw> br_interferers;
  LinkDraw relay;
};

/// Precomputed constants for repeated SINR evaluation.
class ChannelModel {
 public:
  explicit ChannelModel(const SceneConfig& cfg);

  const SceneConfig& config() const { return cfg_; }
  const Geometry& geometry() const { return geo_; }

  /// Received power in mW over the path from a transmitter to a receiver.
  /// `to_relay` selects the UE->relay distance; `from_relay` the relay->mmAP one.
  double ue_power_mw(bool to_relay, Scheme scheme, const LinkDraw& d) const;
  double relay_power_mw(const LinkDraw& d) const;

  double noise_mw() const { return noise_mw_; }
  double self_interference_mw() const { return cfg_.beta * p_t_mw_; }
  double threshold() const { return gamma_; }

  double los_prob_at(Link link) const;
  double pg_fd() const { return pg_f_; }
  double pg_br() const { return pg_b_; }

  double sinr(const InterferenceScenario& s, const ShadowAndLosRealization& r) const;

  /// Draws one link realization; `los_prob` = 1 forces LOS.
  template <typename Engine>
  LinkDraw draw(Engine& rng, double los_prob, double pg_tx) const;

 private:
  // path: 0 UE->mmAP, 1 UE->relay, 2 relay->mmAP.
  double path_gain(int path, const LinkDraw& d) const;

  SceneConfig cfg_;
  Geometry geo_;
  double p_t_mw_;
  double noise_mw_;
  double gamma_;
  double g_f_;
  double g_b_;
  double pg_f_;
  double pg_b_;
  double los_ud_;
  double los_ur_;
  double mean_loss_db_[3][2];
};

template <typename Engine>
LinkDraw ChannelModel::draw(Engine& rng, double los_prob, double pg_tx) const {
  LinkDraw d;
  if (los_prob < 1.0) d.los = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < los_prob;
  d.shadow_db = std::normal_distribution<double>(0.0, shadowing_sigma_db(d.los))(rng);
  if (pg_tx < 1.0) d.tx_aligned = std::bernoulli_distribution(pg_tx)(rng);
  if (pg_f_ < 1.0) d.rx_aligned = std::bernoulli_distribution(pg_f_)(rng);
  return d;
}

double sample_sinr(const InterferenceScenario& s, const ShadowAndLosRealization& r,
                   const SceneConfig& cfg);

/// Content hash of every field that influences success probabilities.
/// n_ues is excluded: tables for larger N contain those for smaller N.
std::uint64_t channel_hash(const SceneConfig& cfg);

/// Conditional success probabilities for every reachable scenario.
class SuccessTable {
 public:
  SuccessTable() = default;
  SuccessTable(int n_ues, std::uint64_t hash, int samples, std::uint64_t seed);

  int n_ues() const { return n_; }
  std::uint64_t hash() const { return hash_; }
  int samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }

  bool contains(const InterferenceScenario& s) const;
  /// Throws std::out_of_range naming the scenario when absent.
  double at(const InterferenceScenario& s) const;
  double operator()(Link link, Scheme scheme, int n_fd, int n_br, bool relay_active) const {
    return at({link, scheme, n_fd, n_br, relay_active});
  }
  void set(const InterferenceScenario& s, double p);

  std::vector<std::pair<InterferenceScenario, double>> entries() const;

  void write_csv(std::ostream& out) const;
  static SuccessTable read_csv(std::istream& in);

 private:
  std::size_t index(const InterferenceScenario& s) const;
  bool in_range(const InterferenceScenario& s) const;

  int n_ = 0;
  std::uint64_t hash_ = 0;
  int samples_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<double> values_;
};

std::vector<InterferenceScenario> reachable_scenarios(int n_ues);

double success_probability(const InterferenceScenario& s, const SceneConfig& cfg);

/// Builds the full table for cfg.n_ues. workers <= 0 picks the hardware count.
SuccessTable build_success_table(const SceneConfig& cfg, int workers = 1);

/// Loads `<dir>/table-<hash>.csv` when it holds a table with at least
/// cfg.n_ues UEs and the matching hash, otherwise builds and stores it.
SuccessTable load_or_build_table(const SceneConfig& cfg, const std::string& cache_dir,
                                 int workers = 1);

}  // namespace mmrelay
