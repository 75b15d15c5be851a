#include "mmrelay/sim.hpp"

#include <cmath>
#include <deque>
#include <ostream>
#include <random>
#include <stdexcept>

#include "mmrelay/numeric.hpp"
#include "mmrelay/queueing.hpp"

namespace mmrelay {

SimMode parse_sim_mode(const std::string& text) {
  if (text == "table") return SimMode::table;
  if (text == "physical") return SimMode::physical;
  throw std::invalid_argument("unknown simulation mode '" + text + "'");
}

const char* to_string(SimMode m) { return m == SimMode::table ? "table" : "physical"; }

namespace {

constexpr int kNone = -1;

struct UeState {
  int aligning_remaining = 0;
  int pending_strategy = kNone;
  int last_attempt_strategy = kNone;
  long long head_start = 0;
  long long alignment_slots = 0;
};

struct RelayPacket {
  long long head_start;       // slot the packet reached its UE's queue head
  long long alignment_slots;  // spent before it left the UE
  long long admit_slot;
  long long fifo_head_slot;   // slot it reached the FIFO head
};

struct Outcome {
  bool at_ap = false;
  bool at_relay = false;
};

class Simulator {
 public:
  Simulator(const SceneConfig& cfg, const SuccessTable& table, const SimOptions& opt)
      : cfg_(cfg),
        table_(table),
        opt_(opt),
        mix_(mix_from(cfg)),
        channel_(cfg),
        rng_(mix_seed(opt.seed)),
        ues_(static_cast<std::size_t>(cfg.n_ues)) {
    align_[0] = align_[1] = static_cast<int>(std::ceil(cfg.d_a));
    align_[2] = static_cast<int>(std::ceil(cfg.d_a_br.value_or(cfg.d_a)));
    strategy_cdf_[0] = mix_.p_fm();
    strategy_cdf_[1] = mix_.p_fm() + mix_.p_fr();
  }

  SimResult run();

 private:
  double uniform() { return unit_(rng_); }
  bool bernoulli(double p) { return uniform() < p; }
  int draw_strategy() {
    const double u = uniform();
    return u < strategy_cdf_[0] ? 0 : (u < strategy_cdf_[1] ? 1 : 2);
  }

  void resolve_table(const std::vector<int>& tx, bool relay_tx, int n_fm, int n_fr, int n_b,
                     std::vector<Outcome>& out, bool& relay_ok);
  void resolve_physical(const std::vector<int>& tx, bool relay_tx, std::vector<Outcome>& out,
                        bool& relay_ok);

  const SceneConfig& cfg_;
  const SuccessTable& table_;
  const SimOptions& opt_;
  StrategyMix mix_;
  ChannelModel channel_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::vector<UeState> ues_;
  int align_[3];
  double strategy_cdf_[2];
};

void Simulator::resolve_table(const std::vector<int>& tx, bool relay_tx, int n_fm, int n_fr, int n_b,
                              std::vector<Outcome>& out, bool& relay_ok) {
  const auto& t = table_;
  for (std::size_t u = 0; u < tx.size(); ++u) {
    switch (tx[u]) {
      case 0: out[u].at_ap = bernoulli(t(Link::ue_to_ap, Scheme::FD, n_fm - 1, n_b, relay_tx)); break;
      case 1: out[u].at_relay = bernoulli(t(Link::ue_to_relay, Scheme::FD, n_fr - 1, n_b, relay_tx)); break;
      case 2:
        out[u].at_ap = bernoulli(t(Link::ue_to_ap, Scheme::BR, n_fm, n_b - 1, relay_tx));
        out[u].at_relay = bernoulli(t(Link::ue_to_relay, Scheme::BR, n_fr, n_b - 1, relay_tx));
        break;
      default: break;
    }
  }
  relay_ok = relay_tx && bernoulli(t(Link::relay_to_ap, Scheme::FD, n_fm, n_b, false));
}

void Simulator::resolve_physical(const std::vector<int>& tx, bool relay_tx, std::vector<Outcome>& out,
                                 bool& relay_ok) {
  const std::size_t n = tx.size();
  const double los_ap = channel_.los_prob_at(Link::ue_to_ap);
  const double los_relay = channel_.los_prob_at(Link::ue_to_relay);
  // One realization per transmitter-receiver pair, shared by every victim.
  std::vector<LinkDraw> to_ap(n), to_relay(n);
  for (std::size_t u = 0; u < n; ++u) {
    if (tx[u] == kNone) continue;
    const double pg = tx[u] == 2 ? channel_.pg_br() : channel_.pg_fd();
    if (tx[u] != 1) to_ap[u] = channel_.draw(rng_, los_ap, pg);
    if (tx[u] != 0) to_relay[u] = channel_.draw(rng_, los_relay, pg);
  }
  const LinkDraw relay_link = relay_tx ? channel_.draw(rng_, 1.0, channel_.pg_fd()) : LinkDraw{};

  const auto realize = [&](std::size_t self, bool at_relay, const LinkDraw& desired) {
    ShadowAndLosRealization r;
    r.desired = desired;
    r.relay = relay_link;
    for (std::size_t v = 0; v < n; ++v) {
      if (v == self || tx[v] == kNone) continue;
      if (tx[v] == 2) {
        r.br_interferers.push_back(at_relay ? to_relay[v] : to_ap[v]);
      } else if ((tx[v] == 1) == at_relay) {
        r.fd_interferers.push_back(at_relay ? to_relay[v] : to_ap[v]);
      }
    }
    return r;
  };
  const double gamma = channel_.threshold();
  for (std::size_t u = 0; u < n; ++u) {
    if (tx[u] == kNone) continue;
    const Scheme scheme = tx[u] == 2 ? Scheme::BR : Scheme::FD;
    if (tx[u] != 1) {
      const auto r = realize(u, false, to_ap[u]);
      const InterferenceScenario s{Link::ue_to_ap, scheme, static_cast<int>(r.fd_interferers.size()),
                                   static_cast<int>(r.br_interferers.size()), relay_tx};
      out[u].at_ap = channel_.sinr(s, r) >= gamma;
    }
    if (tx[u] != 0) {
      const auto r = realize(u, true, to_relay[u]);
      const InterferenceScenario s{Link::ue_to_relay, scheme, static_cast<int>(r.fd_interferers.size()),
                                   static_cast<int>(r.br_interferers.size()), relay_tx};
      out[u].at_relay = channel_.sinr(s, r) >= gamma;
    }
  }
  relay_ok = false;
  if (relay_tx) {
    const auto r = realize(n, false, relay_link);
    const InterferenceScenario s{Link::relay_to_ap, Scheme::FD, static_cast<int>(r.fd_interferers.size()),
                                 static_cast<int>(r.br_interferers.size()), false};
    relay_ok = channel_.sinr(s, r) >= gamma;
  }
}

SimResult Simulator::run() {
  const long long slots = opt_.slots;
  const long long warmup = static_cast<long long>(std::floor(opt_.warmup_fraction * static_cast<double>(slots)));
  const int n = cfg_.n_ues;

  // Previous attempts are i.i.d., so start from the stationary strategy law.
  for (auto& ue : ues_) ue.last_attempt_strategy = draw_strategy();

  std::deque<RelayPacket> fifo;
  std::vector<int> tx(static_cast<std::size_t>(n));
  std::vector<Outcome> outcome(static_cast<std::size_t>(n));

  long long delivered = 0, transmissions = 0, admissions_measured = 0;
  long long empty_slots = 0, busy_slots = 0, relay_successes = 0, sojourn_count = 0;
  CompensatedSum delay_sum, queue_sum, sojourn_sum, align_sum, queueing_sum, relay_tx_sum;
  SimResult res;
  res.slots = slots;
  res.seed = opt_.seed;
  const int blocks = std::max(1, opt_.queue_blocks);
  std::vector<double> block_sum(static_cast<std::size_t>(blocks), 0.0);
  std::vector<long long> block_len(static_cast<std::size_t>(blocks), 0);

  for (long long t = 0; t < slots; ++t) {
    const bool measure = t >= warmup;
    const auto qsize = static_cast<long long>(fifo.size());
    const auto blk = static_cast<std::size_t>(t * blocks / slots);
    block_sum[blk] += static_cast<double>(qsize);
    ++block_len[blk];
    const bool relay_tx = qsize > 0 && bernoulli(mix_.q_r);
    if (measure) {
      queue_sum += static_cast<double>(qsize);
      (qsize == 0 ? empty_slots : busy_slots) += 1;
    }

    int counts[3] = {0, 0, 0};
    for (int u = 0; u < n; ++u) {
      UeState& ue = ues_[static_cast<std::size_t>(u)];
      int& s = tx[static_cast<std::size_t>(u)];
      s = kNone;
      if (ue.aligning_remaining > 0) {
        if (--ue.aligning_remaining == 0) {
          s = ue.pending_strategy;
          ue.pending_strategy = kNone;
        }
      } else if (bernoulli(mix_.q_u)) {
        const int pick = draw_strategy();
        const int cost = align_[pick];
        if (pick != ue.last_attempt_strategy && cost > 0) {
          ue.aligning_remaining = cost;
          ue.pending_strategy = pick;
          ue.alignment_slots += cost;
        } else {
          s = pick;
        }
        ue.last_attempt_strategy = pick;
      }
      if (s != kNone) {
        ++counts[s];
        if (measure) ++transmissions;
      }
      outcome[static_cast<std::size_t>(u)] = {};
    }

    bool relay_ok = false;
    if (opt_.mode == SimMode::table) {
      resolve_table(tx, relay_tx, counts[0], counts[1], counts[2], outcome, relay_ok);
    } else {
      resolve_physical(tx, relay_tx, outcome, relay_ok);
    }

    if (relay_ok) {
      const RelayPacket p = fifo.front();
      fifo.pop_front();
      if (!fifo.empty()) fifo.front().fifo_head_slot = t + 1;
      ++res.relay_deliveries_total;
      if (measure) {
        ++relay_successes;
        ++delivered;
        const double total = static_cast<double>(t - p.head_start + 1);
        const double relay_part = static_cast<double>(t - p.fifo_head_slot + 1);
        const double wait = static_cast<double>(p.fifo_head_slot - p.admit_slot - 1);
        delay_sum += total;
        align_sum += static_cast<double>(p.alignment_slots);
        queueing_sum += wait;
        relay_tx_sum += relay_part;
        sojourn_sum += static_cast<double>(t - p.admit_slot);
        ++sojourn_count;
      }
    }

    for (int u = 0; u < n; ++u) {
      const int s = tx[static_cast<std::size_t>(u)];
      if (s == kNone) continue;
      const Outcome& o = outcome[static_cast<std::size_t>(u)];
      UeState& ue = ues_[static_cast<std::size_t>(u)];
      const bool direct = (s == 0 || s == 2) && o.at_ap;
      const bool admitted = !direct && (s == 1 || s == 2) && o.at_relay;
      if (!direct && !admitted) continue;
      if (direct && measure) {
        ++delivered;
        delay_sum += static_cast<double>(t - ue.head_start + 1);
        align_sum += static_cast<double>(ue.alignment_slots);
      }
      if (admitted) {
        fifo.push_back({ue.head_start, ue.alignment_slots, t, fifo.empty() ? t + 1 : 0});
        ++res.admissions_total;
        if (measure) ++admissions_measured;
      }
      ue.head_start = t + 1;
      ue.alignment_slots = 0;
    }

    if (opt_.trace != nullptr) {
      std::ostream& os = *opt_.trace;
      os << t << ',' << fifo.size() << ',';
      for (int u = 0; u < n; ++u) {
        const UeState& ue = ues_[static_cast<std::size_t>(u)];
        static const char* names = "mrb";
        const int s = tx[static_cast<std::size_t>(u)];
        os << (s != kNone ? names[s] : (ue.aligning_remaining > 0 ? 'a' : '-'));
      }
      os << '\n';
    }
  }

  const double measured = static_cast<double>(slots - warmup);
  res.delivered = delivered;
  res.final_queue = static_cast<long long>(fifo.size());
  res.t_empirical = measured > 0 ? static_cast<double>(delivered) / measured : 0.0;
  res.q_tx_empirical = measured > 0 ? static_cast<double>(transmissions) / (measured * n) : 0.0;
  res.lambda_empirical = measured > 0 ? static_cast<double>(admissions_measured) / measured : 0.0;
  res.mu_empirical = busy_slots > 0 ? static_cast<double>(relay_successes) / static_cast<double>(busy_slots) : 0.0;
  res.p_empty_empirical = measured > 0 ? static_cast<double>(empty_slots) / measured : 0.0;
  res.q_bar_empirical = measured > 0 ? queue_sum.value() / measured : 0.0;
  res.relay_sojourn = sojourn_count > 0 ? sojourn_sum.value() / static_cast<double>(sojourn_count) : 0.0;
  if (delivered > 0) {
    const double d = static_cast<double>(delivered);
    res.d_empirical = delay_sum.value() / d;
    res.d_breakdown.alignment = align_sum.value() / d;
    res.d_breakdown.queueing = queueing_sum.value() / d;
    res.d_breakdown.relay_tx = relay_tx_sum.value() / d;
    res.d_breakdown.ue_tx = res.d_empirical - res.d_breakdown.alignment - res.d_breakdown.queueing -
                            res.d_breakdown.relay_tx;
  }
  for (int b = 0; b < blocks; ++b) {
    const auto u = static_cast<std::size_t>(b);
    res.queue_block_means.push_back(block_len[u] > 0 ? block_sum[u] / static_cast<double>(block_len[u]) : 0.0);
  }
  return res;
}

}  // namespace

SimResult run_simulation(const SceneConfig& cfg, const SuccessTable& table, const SimOptions& opt) {
  validate(cfg);
  if (opt.slots < 1) throw std::invalid_argument("slots must be positive");
  if (table.n_ues() < cfg.n_ues) {
    throw std::invalid_argument("success table built for fewer UEs than the configuration");
  }
  Simulator sim(cfg, table, opt);
  return sim.run();
}

}  // namespace mmrelay
