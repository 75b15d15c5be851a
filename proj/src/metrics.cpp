#include "mmrelay/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmrelay/numeric.hpp"

namespace mmrelay {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNearInstability = 1e-2;
}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::stable: return "stable";
    case Regime::near_instability: return "near_instability";
    case Regime::unstable: return "unstable";
  }
  return "?";
}

Regime classify(const QueueReport& q) {
  if (!q.stable) return Regime::unstable;
  if (q.mu_r > 0.0 && std::fabs(q.lambda1 - q.mu_r) / q.mu_r < kNearInstability) {
    return Regime::near_instability;
  }
  return Regime::stable;
}

ThroughputParts throughput_parts(const SuccessTable& t, const StrategyMix& mix, int n) {
  if (t.n_ues() < n) throw std::invalid_argument("success table too small for the UE count");
  std::array<CompensatedSum, 2> ud_f, ud_b, ur_f, ur_b;
  for_each_config(n - 1, mix, [&](double w, int n_fm, int n_fr, int n_b) {
    for (int ra = 0; ra < 2; ++ra) {
      const bool a = ra == 1;
      const auto u = static_cast<std::size_t>(ra);
      ud_f[u] += w * t(Link::ue_to_ap, Scheme::FD, n_fm, n_b, a);
      ud_b[u] += w * t(Link::ue_to_ap, Scheme::BR, n_fm, n_b, a);
      ur_f[u] += w * t(Link::ue_to_relay, Scheme::FD, n_fr, n_b, a);
      ur_b[u] += w * t(Link::ue_to_relay, Scheme::BR, n_fr, n_b, a) *
                 (1.0 - t(Link::ue_to_ap, Scheme::BR, n_fm, n_b, a));
    }
  });
  ThroughputParts p;
  for (std::size_t u = 0; u < 2; ++u) {
    p.ud_f[u] = ud_f[u].value();
    p.ud_b[u] = ud_b[u].value();
    p.ur_f[u] = ur_f[u].value();
    p.ur_b[u] = ur_b[u].value();
  }
  return p;
}

double ThroughputComponents::t_u(const StrategyMix& mix) const {
  return mix.p_fm() * t_ud_f + mix.p_fr() * t_ur_f + mix.p_b() * (t_ud_b + t_ur_b);
}

double ThroughputComponents::relay_flow(const StrategyMix& mix) const {
  return mix.p_fr() * t_ur_f + mix.p_b() * t_ur_b;
}

ThroughputComponents mix_components(const ThroughputParts& p, double w) {
  const auto blend = [w](const std::array<double, 2>& v) { return (1.0 - w) * v[0] + w * v[1]; };
  return {blend(p.ud_f), blend(p.ud_b), blend(p.ur_f), blend(p.ur_b)};
}

ThroughputComponents throughput_components(const SuccessTable& table, const StrategyMix& mix, int n,
                                           double p_nonempty) {
  return mix_components(throughput_parts(table, mix, n), mix.q_r * p_nonempty);
}

double aggregate_throughput(const ThroughputComponents& c, const StrategyMix& mix, int n,
                            const QueueReport& queue) {
  const double q_tx = actual_tx_prob(mix);
  if (queue.stable) return n * q_tx * c.t_u(mix);
  return n * q_tx * (mix.p_fm() * c.t_ud_f + mix.p_b() * c.t_ud_b) + queue.mu_r;
}

double relay_delay(const QueueReport& queue) { return queue.stable ? queue.d_rel : kInf; }

DelayResult packet_delay(const ThroughputComponents& c, const StrategyMix& mix, const QueueReport& queue) {
  DelayResult r;
  const double q_u = mix.q_u;
  const double t_u = c.t_u(mix);
  const double relay_share = c.relay_flow(mix);
  const double d_a = mix.d_a;
  if (!queue.stable || q_u <= 0.0 || t_u <= 0.0 || (relay_share > 0.0 && !std::isfinite(queue.d_rel))) {
    r.d = r.d_recursion = kInf;
    r.d_strategy = {kInf, kInf, kInf};
    r.breakdown = {kInf, relay_share > 0.0 ? kInf : 0.0, relay_share > 0.0 ? kInf : 0.0,
                   d_a > 0.0 ? kInf : 0.0};
    return r;
  }

  const double p[3] = {mix.p_fm(), mix.p_fr(), mix.p_b()};
  const double direct[3] = {c.t_ud_f, 0.0, c.t_ud_b};
  const double relay[3] = {0.0, c.t_ur_f, c.t_ur_b};
  const double cc = 1.0 + p[0] * p[0] * (c.t_ud_f - t_u - 1.0) + p[1] * p[1] * (c.t_ur_f - t_u - 1.0) +
                    p[2] * p[2] * (c.t_ud_b + c.t_ur_b - t_u - 1.0);
  const double d_r = relay_share > 0.0 ? queue.d_rel : 0.0;
  const double relay_term = relay_share > 0.0 ? q_u * d_r * relay_share : 0.0;
  r.d = (1.0 + relay_term + d_a * q_u * cc) / (q_u * t_u);

  r.breakdown.ue_tx = 1.0 / (q_u * t_u);
  if (relay_share > 0.0) {
    r.breakdown.queueing = queue.d_q * relay_share / t_u;
    r.breakdown.relay_tx = (1.0 / queue.mu_r) * relay_share / t_u;
  }
  r.breakdown.alignment = d_a * cc / t_u;

  // Per-strategy recursion: after a failure the next attempt draws strategy j
  // and pays the alignment into j when it differs from s.
  const double align[3] = {mix.alignment(Strategy::fm), mix.alignment(Strategy::fr),
                           mix.alignment(Strategy::b)};
  double a[3][4];
  for (int s = 0; s < 3; ++s) {
    const double fail = 1.0 - direct[s] - relay[s];
    double switch_cost = 0.0;
    for (int j = 0; j < 3; ++j) {
      a[s][j] = -q_u * fail * p[j];
      if (j != s) switch_cost += p[j] * align[j];
    }
    a[s][s] = 1.0 - (1.0 - q_u) - q_u * fail * p[s];
    const double relay_part = relay[s] > 0.0 ? q_u * relay[s] * (1.0 + d_r) : 0.0;
    a[s][3] = q_u * direct[s] + relay_part + q_u * fail * (1.0 + switch_cost) + (1.0 - q_u);
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::fabs(a[row][col]) > std::fabs(a[piv][col])) piv = row;
    }
    if (a[piv][col] == 0.0) throw std::runtime_error("delay recursion is singular");
    for (int k = 0; k < 4; ++k) std::swap(a[col][k], a[piv][k]);
    for (int row = 0; row < 3; ++row) {
      if (row == col) continue;
      const double f = a[row][col] / a[col][col];
      for (int k = col; k < 4; ++k) a[row][k] -= f * a[col][k];
    }
  }
  CompensatedSum total;
  for (int s = 0; s < 3; ++s) {
    r.d_strategy[static_cast<std::size_t>(s)] = a[s][3] / a[s][s];
    total += p[s] * (r.d_strategy[static_cast<std::size_t>(s)] + (1.0 - p[s]) * align[s]);
  }
  r.d_recursion = total.value();
  r.finite = true;
  return r;
}

AlignmentDurations alignment_durations(double theta_bw_ue, double theta_bw_ap, double m_pilots,
                                       double l_dirs) {
  if (!(theta_bw_ue > 0.0 && theta_bw_ap > 0.0 && m_pilots > 0.0 && l_dirs > 0.0)) {
    throw std::invalid_argument("alignment_durations: arguments must be positive");
  }
  const auto beams = [](double theta) {
    // Guard against 2pi/theta landing a hair above an integer.
    return std::ceil(2.0 * std::numbers::pi / theta - 1e-9);
  };
  const double n_ue = beams(theta_bw_ue);
  const double n_ap = beams(theta_bw_ap);
  const double n_relay = n_ap;
  AlignmentDurations d;
  d.d_a_f = n_ue * n_ap / (l_dirs * m_pilots);
  d.d_a_b = n_ue * n_ap * n_relay / (l_dirs * m_pilots);
  return d;
}

double packet_delay_variable_alignment(const ThroughputComponents& c, const StrategyMix& mix,
                                       const QueueReport& queue, double d_a_f, double d_a_b) {
  const double q_u = mix.q_u;
  const double t_u = c.t_u(mix);
  const double relay_share = c.relay_flow(mix);
  if (!queue.stable || q_u <= 0.0 || t_u <= 0.0 || (relay_share > 0.0 && !std::isfinite(queue.d_rel))) {
    return kInf;
  }
  const double p_fm = mix.p_fm();
  const double p_fr = mix.p_fr();
  const double p_b = mix.p_b();
  const double c1 = p_fm * p_fm * (c.t_ud_f - t_u - 1.0) + p_fr * p_fr * (c.t_ur_f - t_u - 1.0);
  const double c2 = 1.0 + p_b * p_b * (c.t_ud_b + c.t_ur_b - t_u - 1.0);
  const double relay_term = relay_share > 0.0 ? q_u * queue.d_rel * relay_share : 0.0;
  return (1.0 + relay_term + q_u * (d_a_f * c1 + d_a_b * c2)) / (q_u * t_u);
}

Evaluation evaluate(const SceneConfig& cfg, const SuccessTable& table) {
  validate(cfg);
  const StrategyMix mix = mix_from(cfg);
  const int n = cfg.n_ues;
  Evaluation ev;
  ev.queue = analyze_queue(table, mix, n);
  const QueueReport& q = ev.queue;
  const double p_nonempty = q.stable ? 1.0 - q.p_empty : 1.0;
  const ThroughputComponents c = throughput_components(table, mix, n, p_nonempty);

  PerfReport& r = ev.perf;
  r.q_tx = q.q_tx;
  r.t_ud_f = c.t_ud_f;
  r.t_ud_b = c.t_ud_b;
  r.t_ur_f = c.t_ur_f;
  r.t_ur_b = c.t_ur_b;
  r.t_u = c.t_u(mix);
  r.t_aggregate = aggregate_throughput(c, mix, n, q);
  r.regime = classify(q);
  const DelayResult d = packet_delay(c, mix, q);
  r.d_total = d.d;
  r.d_recursion = d.d_recursion;
  r.d_breakdown = d.breakdown;
  if (cfg.d_a_br && *cfg.d_a_br != cfg.d_a) {
    r.d_total = packet_delay_variable_alignment(c, mix, q, cfg.d_a, *cfg.d_a_br);
    // The constant-alignment split does not apply; report the excess as alignment.
    if (std::isfinite(r.d_total)) {
      r.d_breakdown.alignment = r.d_total - r.d_breakdown.ue_tx - r.d_breakdown.queueing -
                                r.d_breakdown.relay_tx;
    }
  }
  return ev;
}

}  // namespace mmrelay
