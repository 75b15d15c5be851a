#pragma once

#include <array>
#include <string>

#include "mmrelay/channel.hpp"
#include "mmrelay/queueing.hpp"

namespace mmrelay {

enum class Regime { stable, near_instability, unstable };
const char* to_string(Regime r);

/// Regime of the relay queue; near_instability when |lambda1 - mu| / mu < 1e-2.
Regime classify(const QueueReport& q);

/// Per-transmission success probabilities of a tagged UE, averaged over the
/// other N-1 UEs. Index [0]: relay silent, [1]: relay transmitting.
struct ThroughputParts {
  std::array<double, 2> ud_f{};
  std::array<double, 2> ud_b{};
  std::array<double, 2> ur_f{};
  std::array<double, 2> ur_b{};
};

ThroughputParts throughput_parts(const SuccessTable& table, const StrategyMix& mix, int n);

struct ThroughputComponents {
  double t_ud_f = 0.0;
  double t_ud_b = 0.0;
  double t_ur_f = 0.0;
  double t_ur_b = 0.0;

  /// Conditional per-user throughput of a transmitting UE.
  double t_u(const StrategyMix& mix) const;
  /// Relay-bound share of t_u: q_uf q_ur T_ur^f + q_ub T_ur^b.
  double relay_flow(const StrategyMix& mix) const;
};

/// Components mixed by the probability q_r * p_nonempty that the relay transmits.
ThroughputComponents throughput_components(const SuccessTable& table, const StrategyMix& mix, int n,
                                           double p_nonempty);
ThroughputComponents mix_components(const ThroughputParts& parts, double relay_tx);

double aggregate_throughput(const ThroughputComponents& c, const StrategyMix& mix, int n,
                            const QueueReport& queue);

/// Mean time from relay admission to delivery; +inf when unstable.
double relay_delay(const QueueReport& queue);

struct DelayBreakdown {
  double ue_tx = 0.0;
  double relay_tx = 0.0;
  double queueing = 0.0;
  double alignment = 0.0;
  double sum() const { return ue_tx + relay_tx + queueing + alignment; }
};

struct DelayResult {
  double d = 0.0;            // closed form
  double d_recursion = 0.0;  // from the per-strategy recursion
  std::array<double, 3> d_strategy{};  // D_fm, D_fr, D_b
  DelayBreakdown breakdown;
  bool finite = false;
};

/// Mean head-of-line packet delay. The closed form uses mix.d_a for every
/// strategy; the recursion honours mix.d_a_br for switches into BR.
DelayResult packet_delay(const ThroughputComponents& c, const StrategyMix& mix, const QueueReport& queue);

/// Alignment durations in slots from beam counts: N_B = ceil(2 pi / theta).
/// The mmAP and relay share theta_bw_ap.
struct AlignmentDurations {
  double d_a_f = 0.0;
  double d_a_b = 0.0;
};
AlignmentDurations alignment_durations(double theta_bw_ue, double theta_bw_ap, double m_pilots,
                                       double l_dirs);

/// Delay with FD alignment d_a_f and BR alignment d_a_b.
double packet_delay_variable_alignment(const ThroughputComponents& c, const StrategyMix& mix,
                                       const QueueReport& queue, double d_a_f, double d_a_b);

struct PerfReport {
  double q_tx = 0.0;
  double t_aggregate = 0.0;
  double t_ud_f = 0.0;
  double t_ud_b = 0.0;
  double t_ur_f = 0.0;
  double t_ur_b = 0.0;
  double t_u = 0.0;
  double d_total = 0.0;
  double d_recursion = 0.0;
  DelayBreakdown d_breakdown;
  Regime regime = Regime::stable;
};

struct Evaluation {
  QueueReport queue;
  PerfReport perf;
};

/// Full analysis of one configuration; uses cfg.n_ues UEs from the table.
Evaluation evaluate(const SceneConfig& cfg, const SuccessTable& table);

}  // namespace mmrelay
