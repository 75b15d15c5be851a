#include "mmrelay/channel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mmrelay/numeric.hpp"

namespace mmrelay {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kSigmaLos = 4.0;
constexpr double kSigmaNlos = 7.82;

// Monte-Carlo groups. Each (link, scheme) pair owns one random stream; all
// interferer counts and relay states of that pair are evaluated on shared draws.
constexpr int kGroups = 5;

int group_of(Link link, Scheme scheme) {
  switch (link) {
    case Link::ue_to_ap: return scheme == Scheme::FD ? 0 : 1;
    case Link::ue_to_relay: return scheme == Scheme::FD ? 2 : 3;
    case Link::relay_to_ap: return scheme == Scheme::FD ? 4 : -1;
  }
  return -1;
}

Link group_link(int g) {
  return g < 2 ? Link::ue_to_ap : (g < 4 ? Link::ue_to_relay : Link::relay_to_ap);
}
Scheme group_scheme(int g) { return (g == 1 || g == 3) ? Scheme::BR : Scheme::FD; }

}  // namespace

const char* to_string(Link link) {
  switch (link) {
    case Link::ue_to_ap: return "ue_to_ap";
    case Link::ue_to_relay: return "ue_to_relay";
    case Link::relay_to_ap: return "relay_to_ap";
  }
  return "?";
}

const char* to_string(Scheme scheme) { return scheme == Scheme::FD ? "FD" : "BR"; }

Link parse_link(const std::string& text) {
  if (text == "ue_to_ap") return Link::ue_to_ap;
  if (text == "ue_to_relay") return Link::ue_to_relay;
  if (text == "relay_to_ap") return Link::relay_to_ap;
  throw std::invalid_argument("unknown link '" + text + "'");
}

Scheme parse_scheme(const std::string& text) {
  if (text == "FD") return Scheme::FD;
  if (text == "BR") return Scheme::BR;
  throw std::invalid_argument("unknown scheme '" + text + "'");
}

std::string describe(const InterferenceScenario& s) {
  std::ostringstream os;
  os << '(' << to_string(s.link) << ", " << to_string(s.scheme) << ", n_fd=" << s.n_fd
     << ", n_br=" << s.n_br << ", relay_active=" << (s.relay_active ? "true" : "false") << ')';
  return os.str();
}

void check_scenario(const InterferenceScenario& s, int n_ues) {
  const auto fail = [&](const char* why) {
    throw std::invalid_argument("scenario " + describe(s) + ": " + why);
  };
  if (s.n_fd < 0 || s.n_br < 0) fail("negative interferer count");
  if (s.link == Link::relay_to_ap) {
    if (s.scheme != Scheme::FD) fail("the relay transmits FD only");
    if (s.relay_active) fail("relay_active is meaningless for the relay link");
    if (s.n_fd > n_ues || s.n_br > n_ues) fail("more interferers than UEs");
  } else if (s.n_fd + s.n_br > n_ues - 1) {
    fail("more interferers than other UEs");
  }
}

Geometry derive_geometry(const SceneConfig& cfg) {
  if (!(cfg.theta_rd > 0.0 && cfg.theta_rd <= std::numbers::pi)) {
    throw ConfigError("theta_rd", "must lie in (0, pi]");
  }
  Geometry g;
  g.d_ud = cfg.d_ud;
  g.d_ur = cfg.d_ur;
  g.d_rd = std::sqrt(std::max(0.0, cfg.d_ud * cfg.d_ud + cfg.d_ur * cfg.d_ur -
                                       2.0 * cfg.d_ud * cfg.d_ur * std::cos(cfg.theta_rd)));
  const double dh = cfg.h_ap - cfg.h_ue;
  g.d3_ud = std::hypot(g.d_ud, dh);
  g.d3_ur = std::hypot(g.d_ur, dh);
  g.d3_rd = g.d_rd;
  return g;
}

double path_loss_db(double d3d, bool los, const SceneConfig& cfg) {
  const double lf = std::log10(cfg.fc_ghz);
  const double d_bp = 4.0 * (cfg.h_ap - 1.0) * (cfg.h_ue - 1.0) * cfg.fc_ghz * 1e9 / kSpeedOfLight;
  double pl_los;
  if (d_bp <= 0.0 || d3d <= d_bp) {
    pl_los = 32.4 + 21.0 * std::log10(d3d) + 20.0 * lf;
  } else {
    const double dh = cfg.h_ap - cfg.h_ue;
    pl_los = 32.4 + 40.0 * std::log10(d3d) + 20.0 * lf - 9.5 * std::log10(d_bp * d_bp + dh * dh);
  }
  if (los) return pl_los;
  const double pl_nlos = 22.4 + 35.3 * std::log10(d3d) + 21.3 * lf - 0.3 * (cfg.h_ue - 1.5);
  return std::max(pl_los, pl_nlos);
}

double shadowing_sigma_db(bool los) { return los ? kSigmaLos : kSigmaNlos; }

double los_probability(double d2d) {
  if (d2d <= 18.0) return 1.0;
  return 18.0 / d2d + std::exp(-d2d / 36.0) * (1.0 - 18.0 / d2d);
}

double beam_gain(double theta_bw) { return 2.0 * std::numbers::pi / theta_bw; }

double gain_success_prob(double theta_bw, double sigma_e) {
  if (sigma_e <= 0.0) return 1.0;
  const double s = std::sqrt(2.0) * sigma_e;
  return std::min(1.0, std::erf(theta_bw / s) / std::erf(std::numbers::pi / s));
}

ChannelModel::ChannelModel(const SceneConfig& cfg)
    : cfg_(cfg),
      geo_(derive_geometry(cfg)),
      p_t_mw_(dbm_to_mw(cfg.p_t_dbm)),
      noise_mw_(dbm_to_mw(cfg.p_n_dbm)),
      gamma_(db_to_linear(cfg.gamma_db)),
      g_f_(beam_gain(cfg.theta_bw_f)),
      g_b_(beam_gain(cfg.br_beamwidth())),
      pg_f_(gain_success_prob(cfg.theta_bw_f, cfg.sigma_e())),
      pg_b_(gain_success_prob(cfg.br_beamwidth(), cfg.sigma_e())),
      los_ud_(los_probability(cfg.d_ud)),
      los_ur_(los_probability(cfg.d_ur)) {
  const double d3[3] = {geo_.d3_ud, geo_.d3_ur, geo_.d3_rd};
  for (int p = 0; p < 3; ++p) {
    mean_loss_db_[p][0] = path_loss_db(d3[p], true, cfg);
    mean_loss_db_[p][1] = path_loss_db(d3[p], false, cfg);
  }
}

double ChannelModel::path_gain(int path, const LinkDraw& d) const {
  return std::pow(10.0, -(mean_loss_db_[path][d.los ? 0 : 1] + d.shadow_db) / 10.0);
}

double ChannelModel::ue_power_mw(bool to_relay, Scheme scheme, const LinkDraw& d) const {
  const double g_tx = d.tx_aligned ? (scheme == Scheme::FD ? g_f_ : g_b_) : 0.0;
  const double g_rx = d.rx_aligned ? g_f_ : 0.0;
  if (g_tx == 0.0 || g_rx == 0.0) return 0.0;
  return p_t_mw_ * g_tx * g_rx * path_gain(to_relay ? 1 : 0, d);
}

double ChannelModel::relay_power_mw(const LinkDraw& d) const {
  if (!d.tx_aligned || !d.rx_aligned) return 0.0;
  return p_t_mw_ * g_f_ * g_f_ * path_gain(2, d);
}

double ChannelModel::los_prob_at(Link link) const {
  switch (link) {
    case Link::ue_to_ap: return los_ud_;
    case Link::ue_to_relay: return los_ur_;
    case Link::relay_to_ap: return 1.0;
  }
  return 1.0;
}

double ChannelModel::sinr(const InterferenceScenario& s, const ShadowAndLosRealization& r) const {
  if (static_cast<int>(r.fd_interferers.size()) < s.n_fd ||
      static_cast<int>(r.br_interferers.size()) < s.n_br) {
    throw std::invalid_argument("realization lacks interferer draws for " + describe(s));
  }
  const bool at_relay = s.link == Link::ue_to_relay;
  const double signal = s.link == Link::relay_to_ap ? relay_power_mw(r.desired)
                                                    : ue_power_mw(at_relay, s.scheme, r.desired);
  double interference = 0.0;
  for (int i = 0; i < s.n_fd; ++i) {
    interference += ue_power_mw(at_relay, Scheme::FD, r.fd_interferers[static_cast<std::size_t>(i)]);
  }
  for (int i = 0; i < s.n_br; ++i) {
    interference += ue_power_mw(at_relay, Scheme::BR, r.br_interferers[static_cast<std::size_t>(i)]);
  }
  double extra = 0.0;
  if (s.relay_active) {
    if (at_relay) {
      extra = self_interference_mw();
    } else {
      interference += relay_power_mw(r.relay);
    }
  }
  return signal / (noise_mw_ + extra + cfg_.alpha * interference);
}

double sample_sinr(const InterferenceScenario& s, const ShadowAndLosRealization& r,
                   const SceneConfig& cfg) {
  if (s.link == Link::relay_to_ap && s.relay_active) {
    throw std::invalid_argument("relay_active is meaningless for the relay link");
  }
  return ChannelModel(cfg).sinr(s, r);
}

std::uint64_t channel_hash(const SceneConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const double reals[] = {cfg.d_ud,    cfg.d_ur,    cfg.theta_rd, cfg.theta_bw_f, cfg.br_beamwidth(),
                          cfg.fc_ghz,  cfg.h_ap,    cfg.h_ue,     cfg.p_t_dbm,    cfg.p_n_dbm,
                          cfg.gamma_db, cfg.alpha,  cfg.beta,     cfg.sigma_e_deg};
  for (double v : reals) mix(&v, sizeof v);
  const std::int64_t samples = cfg.n_shadow_samples;
  mix(&samples, sizeof samples);
  mix(&cfg.seed, sizeof cfg.seed);
  return h;
}

// ---------------------------------------------------------------------------
// SuccessTable

SuccessTable::SuccessTable(int n_ues, std::uint64_t hash, int samples, std::uint64_t seed)
    : n_(n_ues),
      hash_(hash),
      samples_(samples),
      seed_(seed),
      values_(static_cast<std::size_t>(kGroups * (n_ues + 1) * (n_ues + 1) * 2), -1.0) {}

bool SuccessTable::in_range(const InterferenceScenario& s) const {
  if (group_of(s.link, s.scheme) < 0) return false;
  if (s.n_fd < 0 || s.n_br < 0 || s.n_fd > n_ || s.n_br > n_) return false;
  return true;
}

std::size_t SuccessTable::index(const InterferenceScenario& s) const {
  const std::size_t side = static_cast<std::size_t>(n_ + 1);
  const auto g = static_cast<std::size_t>(group_of(s.link, s.scheme));
  return ((g * side + static_cast<std::size_t>(s.n_fd)) * side + static_cast<std::size_t>(s.n_br)) * 2 +
         (s.relay_active ? 1 : 0);
}

bool SuccessTable::contains(const InterferenceScenario& s) const {
  return in_range(s) && values_[index(s)] >= 0.0;
}

double SuccessTable::at(const InterferenceScenario& s) const {
  if (!contains(s)) throw std::out_of_range("success table has no entry for " + describe(s));
  return values_[index(s)];
}

void SuccessTable::set(const InterferenceScenario& s, double p) {
  if (!in_range(s)) throw std::out_of_range("scenario outside table range: " + describe(s));
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0,1] for " + describe(s));
  values_[index(s)] = p;
}

std::vector<std::pair<InterferenceScenario, double>> SuccessTable::entries() const {
  std::vector<std::pair<InterferenceScenario, double>> out;
  for (int g = 0; g < kGroups; ++g) {
    for (int f = 0; f <= n_; ++f) {
      for (int b = 0; b <= n_; ++b) {
        for (int ra = 0; ra < 2; ++ra) {
          const InterferenceScenario s{group_link(g), group_scheme(g), f, b, ra == 1};
          if (contains(s)) out.emplace_back(s, values_[index(s)]);
        }
      }
    }
  }
  return out;
}

void SuccessTable::write_csv(std::ostream& out) const {
  out << "# success-table v1 n_ues=" << n_ << " hash=" << hash_ << " samples=" << samples_
      << " seed=" << seed_ << '\n';
  out << "link,scheme,n_fd,n_br,relay_active,probability\n";
  char buf[64];
  for (const auto& [s, p] : entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", p);
    out << to_string(s.link) << ',' << to_string(s.scheme) << ',' << s.n_fd << ',' << s.n_br << ','
        << (s.relay_active ? 1 : 0) << ',' << buf << '\n';
  }
}

SuccessTable SuccessTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty success table file");
  int n = 0;
  int samples = 0;
  unsigned long long hash = 0;
  unsigned long long seed = 0;
  if (std::sscanf(line.c_str(), "# success-table v1 n_ues=%d hash=%llu samples=%d seed=%llu", &n,
                  &hash, &samples, &seed) != 4 ||
      n < 1) {
    throw std::runtime_error("unrecognized success table header: " + line);
  }
  SuccessTable t(n, hash, samples, seed);
  std::getline(in, line);
  if (line != "link,scheme,n_fd,n_br,relay_active,probability") {
    throw std::runtime_error("unexpected success table columns: " + line);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string link, scheme, f, b, ra, p;
    if (!std::getline(ls, link, ',') || !std::getline(ls, scheme, ',') || !std::getline(ls, f, ',') ||
        !std::getline(ls, b, ',') || !std::getline(ls, ra, ',') || !std::getline(ls, p)) {
      throw std::runtime_error("malformed success table row: " + line);
    }
    t.set({parse_link(link), parse_scheme(scheme), std::stoi(f), std::stoi(b), ra == "1"},
          std::stod(p));
  }
  return t;
}

std::vector<InterferenceScenario> reachable_scenarios(int n_ues) {
  std::vector<InterferenceScenario> out;
  for (int g = 0; g < kGroups; ++g) {
    const Link link = group_link(g);
    const bool relay_link = link == Link::relay_to_ap;
    const int max_count = relay_link ? n_ues : n_ues - 1;
    for (int f = 0; f <= max_count; ++f) {
      for (int b = 0; b <= max_count; ++b) {
        if (!relay_link && f + b > max_count) continue;
        out.push_back({link, group_scheme(g), f, b, false});
        if (!relay_link) out.push_back({link, group_scheme(g), f, b, true});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimation

namespace {

// Success probabilities of one group for every n_fd <= max_fd, n_br <= max_br,
// n_fd + n_br <= max_sum, indexed [n_fd][n_br][relay_active].
struct GroupResult {
  int max_fd = 0;
  int max_br = 0;
  std::vector<double> p;
  double& at(int f, int b, int ra) {
    return p[(static_cast<std::size_t>(f) * static_cast<std::size_t>(max_br + 1) +
              static_cast<std::size_t>(b)) * 2 + static_cast<std::size_t>(ra)];
  }
};

GroupResult estimate_group(const ChannelModel& ch, int group, int max_fd, int max_br, int max_sum) {
  const SceneConfig& cfg = ch.config();
  const Link link = group_link(group);
  const Scheme scheme = group_scheme(group);
  const bool at_relay = link == Link::ue_to_relay;
  const bool relay_link = link == Link::relay_to_ap;
  const int slots = std::max(max_fd, max_br);
  const int n_states = relay_link ? 1 : 2;  // desired link LOS / NLOS
  const int n_ra = relay_link ? 1 : 2;
  const double gamma = ch.threshold();
  const double noise = ch.noise_mw();
  const double alpha = cfg.alpha;
  const double pg_tx_desired = relay_link ? ch.pg_fd() : (scheme == Scheme::FD ? ch.pg_fd() : ch.pg_br());

  const std::size_t side = static_cast<std::size_t>(slots + 1);
  // Interference is fl[k] + fn[f-k] + bl[h] + bn[b-h], each a non-decreasing
  // prefix sum. For fixed (f, k, h) the passing b form a prefix, found by
  // binary search and recorded in a difference array along b.
  // diff[state][ra][f][k][h][b] with b in [0, side].
  const std::size_t row = side + 1;
  const std::size_t block = side * side * side * row;
  std::vector<std::int32_t> diff(static_cast<std::size_t>(n_states * n_ra) * block, 0);
  const auto didx = [&](int st, int ra, int f, int k, int h, int b) {
    return static_cast<std::size_t>(st * n_ra + ra) * block +
           ((static_cast<std::size_t>(f) * side + static_cast<std::size_t>(k)) * side +
            static_cast<std::size_t>(h)) * row + static_cast<std::size_t>(b);
  };

  std::vector<double> fl(side, 0.0), fn(side, 0.0), bl(side, 0.0), bn(side, 0.0);
  const int samples = cfg.n_shadow_samples;
  double signal[2];
  double extra_power[2];

  for (int s = 0; s < samples; ++s) {
    SplitMix64 rng(mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(group)),
                                 static_cast<std::uint64_t>(s)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto gain_ok = [&rng](double pg) {
      return pg >= 1.0 || std::bernoulli_distribution(pg)(rng);
    };

    // Desired link: one standard normal shared by the LOS and NLOS branches.
    LinkDraw desired;
    const double z = normal(rng);
    desired.tx_aligned = gain_ok(pg_tx_desired);
    desired.rx_aligned = gain_ok(ch.pg_fd());
    for (int st = 0; st < n_states; ++st) {
      desired.los = st == 0;
      desired.shadow_db = shadowing_sigma_db(desired.los) * z;
      signal[st] = relay_link ? ch.relay_power_mw(desired) : ch.ue_power_mw(at_relay, scheme, desired);
    }

    LinkDraw relay;
    relay.los = true;
    relay.shadow_db = shadowing_sigma_db(true) * normal(rng);
    relay.tx_aligned = gain_ok(ch.pg_fd());
    relay.rx_aligned = gain_ok(ch.pg_fd());
    extra_power[0] = 0.0;
    extra_power[1] = at_relay ? ch.self_interference_mw() : alpha * ch.relay_power_mw(relay);

    // Slot-major draws keep every prefix identical across table sizes.
    for (int i = 0; i < slots; ++i) {
      double* dest[4] = {&fl[static_cast<std::size_t>(i) + 1], &fn[static_cast<std::size_t>(i) + 1],
                         &bl[static_cast<std::size_t>(i) + 1], &bn[static_cast<std::size_t>(i) + 1]};
      for (int c = 0; c < 4; ++c) {
        LinkDraw d;
        d.los = (c % 2) == 0;
        d.shadow_db = shadowing_sigma_db(d.los) * normal(rng);
        const Scheme sc = c < 2 ? Scheme::FD : Scheme::BR;
        d.tx_aligned = gain_ok(sc == Scheme::FD ? ch.pg_fd() : ch.pg_br());
        d.rx_aligned = gain_ok(ch.pg_fd());
        *dest[c] = ch.ue_power_mw(at_relay, sc, d);
      }
    }
    for (int i = 1; i <= slots; ++i) {
      const auto u = static_cast<std::size_t>(i);
      fl[u] += fl[u - 1];
      fn[u] += fn[u - 1];
      bl[u] += bl[u - 1];
      bn[u] += bn[u - 1];
    }

    for (int st = 0; st < n_states; ++st) {
      if (!(signal[st] > 0.0)) continue;
      for (int ra = 0; ra < n_ra; ++ra) {
        const double base = noise + extra_power[ra];
        // Budget for alpha * interference; infinite when interference is irrelevant.
        double budget;
        if (alpha == 0.0) {
          if (signal[st] < gamma * base) continue;
          budget = std::numeric_limits<double>::infinity();
        } else if (gamma == 0.0) {
          budget = std::numeric_limits<double>::infinity();
        } else {
          budget = (signal[st] / gamma - base) / alpha;
          if (budget < 0.0) continue;
        }
        for (int f = 0; f <= max_fd; ++f) {
          const int b_top = std::min(max_br, max_sum - f);
          for (int k = 0; k <= f; ++k) {
            const double fd_part = fl[static_cast<std::size_t>(k)] + fn[static_cast<std::size_t>(f - k)];
            if (fd_part > budget) continue;
            for (int h = 0; h <= b_top; ++h) {
              const double rem = budget - fd_part - bl[static_cast<std::size_t>(h)];
              if (rem < 0.0) break;
              const int i_max = b_top - h;
              const auto* first = bn.data();
              const int n_ok = static_cast<int>(std::upper_bound(first, first + i_max + 1, rem) - first);
              if (n_ok == 0) continue;
              ++diff[didx(st, ra, f, k, h, h)];
              --diff[didx(st, ra, f, k, h, h + n_ok)];
            }
          }
        }
      }
    }
  }

  // Integrate the difference arrays: counts[.., b] = sum of diff up to b.
  for (std::size_t r = 0; r < diff.size(); r += row) {
    for (std::size_t b = 1; b < row; ++b) diff[r + b] += diff[r + b - 1];
  }
  const auto count = [&](int st, int ra, int f, int k, int b, int h) {
    return diff[didx(st, ra, f, k, h, b)];
  };

  const double p_desired_los = ch.los_prob_at(link);
  // Interferers are UEs, so their LOS probability follows the receiver's UE distance.
  const double p_int_los = at_relay ? los_probability(cfg.d_ur) : los_probability(cfg.d_ud);
  GroupResult out;
  out.max_fd = max_fd;
  out.max_br = max_br;
  out.p.assign(static_cast<std::size_t>((max_fd + 1) * (max_br + 1) * 2), -1.0);
  for (int f = 0; f <= max_fd; ++f) {
    const int b_top = std::min(max_br, max_sum - f);
    for (int b = 0; b <= b_top; ++b) {
      for (int ra = 0; ra < n_ra; ++ra) {
        CompensatedSum total;
        for (int st = 0; st < n_states; ++st) {
          const double w_state = st == 0 ? p_desired_los : 1.0 - p_desired_los;
          if (w_state == 0.0) continue;
          CompensatedSum inner;
          for (int k = 0; k <= f; ++k) {
            const double wk = binomial_pmf(f, k, p_int_los);
            for (int h = 0; h <= b; ++h) {
              const double wh = binomial_pmf(b, h, p_int_los);
              inner += wk * wh * static_cast<double>(count(st, ra, f, k, b, h));
            }
          }
          total += w_state * inner.value();
        }
        const double p = std::clamp(total.value() / static_cast<double>(samples), 0.0, 1.0);
        out.at(f, b, ra) = p;
        if (relay_link) out.at(f, b, 1) = p;
      }
    }
  }
  return out;
}

}  // namespace

double success_probability(const InterferenceScenario& s, const SceneConfig& cfg) {
  validate(cfg);
  check_scenario(s, s.link == Link::relay_to_ap ? std::max(s.n_fd, s.n_br)
                                                : s.n_fd + s.n_br + 1);
  const ChannelModel ch(cfg);
  const int g = group_of(s.link, s.scheme);
  GroupResult r = estimate_group(ch, g, s.n_fd, s.n_br, s.n_fd + s.n_br);
  return r.at(s.n_fd, s.n_br, s.relay_active ? 1 : 0);
}

SuccessTable build_success_table(const SceneConfig& cfg, int workers) {
  validate(cfg);
  const ChannelModel ch(cfg);
  const int n = cfg.n_ues;
  std::vector<GroupResult> results(kGroups);
  const auto run = [&](int g) {
    const bool relay_link = group_link(g) == Link::relay_to_ap;
    const int m = relay_link ? n : n - 1;
    results[static_cast<std::size_t>(g)] = estimate_group(ch, g, m, m, relay_link ? 2 * m : m);
  };
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, kGroups);
  if (workers == 1) {
    for (int g = 0; g < kGroups; ++g) run(g);
  } else {
    std::vector<std::thread> pool;
    std::atomic_int next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int g = next++; g < kGroups; g = next++) run(g);
      });
    }
    for (auto& t : pool) t.join();
  }

  SuccessTable table(n, channel_hash(cfg), cfg.n_shadow_samples, cfg.seed);
  for (const auto& s : reachable_scenarios(n)) {
    auto& r = results[static_cast<std::size_t>(group_of(s.link, s.scheme))];
    table.set(s, r.at(s.n_fd, s.n_br, s.relay_active ? 1 : 0));
  }
  return table;
}

SuccessTable load_or_build_table(const SceneConfig& cfg, const std::string& cache_dir, int workers) {
  namespace fs = std::filesystem;
  char name[64];
  std::snprintf(name, sizeof name, "table-%016llx.csv",
                static_cast<unsigned long long>(channel_hash(cfg)));
  const fs::path path = fs::path(cache_dir) / name;
  if (fs::exists(path)) {
    std::ifstream in(path);
    SuccessTable t = SuccessTable::read_csv(in);
    if (t.hash() == channel_hash(cfg) && t.n_ues() >= cfg.n_ues) return t;
  }
  SuccessTable t = build_success_table(cfg, workers);
  fs::create_directories(cache_dir);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    t.write_csv(out);
  }
  fs::rename(tmp, path);
  return t;
}

}  // namespace mmrelay
