#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mmrelay/channel.hpp"
#include "mmrelay/config.hpp"
#include "mmrelay/numeric.hpp"

namespace mmrelay {

enum class Strategy { fm, fr, b };

struct StrategyMix {
  double q_u = 0.0;
  double q_uf = 0.0;
  double q_ur = 0.0;
  double q_r = 1.0;
  double d_a = 0.0;
  std::optional<double> d_a_br;  // alignment into BR; unset means d_a

  double q_ub() const { return 1.0 - q_uf; }
  double q_um() const { return 1.0 - q_ur; }
  double p_fm() const { return q_uf * q_um(); }
  double p_fr() const { return q_uf * q_ur; }
  double p_b() const { return q_ub(); }
  double probability(Strategy s) const;
  /// Slots spent aligning before a transmission with strategy s.
  double alignment(Strategy s) const;
};

StrategyMix mix_from(const SceneConfig& cfg);

/// Probability that two independent strategy draws coincide.
double repeat_probability(const StrategyMix& mix);

/// Long-run per-slot transmit probability of a UE. Strategy-dependent
/// alignment enters through sum_i P_i (1 - P_i) D_i.
double actual_tx_prob(const StrategyMix& mix);

/// Calls fn(weight, n_fm, n_fr, n_b) for every split of `pool` UEs into silent,
/// FD->mmAP, FD->relay and BR transmitters, weighted by its probability.
template <typename Fn>
void for_each_config(int pool, const StrategyMix& mix, Fn&& fn);

/// PMF of relay admissions per slot, k = 0..n. relay_active selects the table
/// entries with the relay transmitting; it does not include the q_r mixing.
std::vector<double> batch_arrival_pmf(const SuccessTable& table, const StrategyMix& mix, int n,
                                      bool relay_active);

struct ArrivalRates {
  double lambda0 = 0.0;  // relay silent
  double a_r = 0.0;      // relay transmitting
  double lambda1(double q_r) const { return (1.0 - q_r) * lambda0 + q_r * a_r; }
};

ArrivalRates arrival_rates(const SuccessTable& table, const StrategyMix& mix, int n);

struct ServiceRate {
  double b_r = 0.0;
  double mu_r = 0.0;
};

ServiceRate service_rate(const SuccessTable& table, const StrategyMix& mix, int n);

struct Stability {
  double q_rmin = 0.0;
  bool unstable_for_all = false;
  double lambda0 = 0.0;
  double a_r = 0.0;
  double b_r = 0.0;
  bool is_stable(double q_r) const;
};

Stability stability(double lambda0, double a_r, double b_r);

/// Batch transitions of the relay queue. p0[k] = P(+k | empty), k = 0..n;
/// p1[k + 1] = P(+k | non-empty), k = -1..n.
struct TransitionKernel {
  int n = 0;
  std::vector<double> p0;
  std::vector<double> p1;

  double empty(int k) const { return p0[static_cast<std::size_t>(k)]; }
  double busy(int k) const { return p1[static_cast<std::size_t>(k + 1)]; }
  /// sum_k k p1_k - p1_{-1}: mean change of a non-empty queue.
  double drift() const;
  double lambda0() const;
};

TransitionKernel transition_kernel(const SuccessTable& table, const StrategyMix& mix, int n);

/// Closed forms; nullopt when the queue is not stable.
std::optional<double> prob_empty(const TransitionKernel& kernel, double lambda0);
std::optional<double> avg_queue_size(const TransitionKernel& kernel, double lambda0);

/// Stationary distribution of the queue-length chain, truncated once the
/// estimated tail mass and tail mean fall below tail_tolerance. Throws
/// std::runtime_error if the chain is not stable or max_states is exceeded.
std::vector<double> stationary_numeric(const TransitionKernel& kernel, double tail_tolerance = 1e-13,
                                       std::size_t max_states = 20'000'000);

struct QueueReport {
  double q_tx = 0.0;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double a_r = 0.0;
  double b_r = 0.0;
  double mu_r = 0.0;
  double q_rmin = 0.0;
  bool unstable_for_all = false;
  bool stable = false;
  double drift = 0.0;
  // Stable regime only; otherwise p_empty = 0 and the rest are +inf.
  double p_empty = 0.0;
  double q_bar = 0.0;
  double lambda_r = 0.0;
  double d_q = 0.0;
  double d_rel = 0.0;
};

QueueReport analyze_queue(const SuccessTable& table, const StrategyMix& mix, int n);

// ---------------------------------------------------------------------------

template <typename Fn>
void for_each_config(int pool, const StrategyMix& mix, Fn&& fn) {
  const double q_tx = actual_tx_prob(mix);
  for (int m = 0; m <= pool; ++m) {
    const double wm = binomial_pmf(pool, m, q_tx);
    if (wm == 0.0) continue;
    for (int i = 0; i <= m; ++i) {
      const double wi = wm * binomial_pmf(m, i, mix.q_uf);
      if (wi == 0.0) continue;
      for (int j = 0; j <= i; ++j) {
        const double w = wi * binomial_pmf(i, j, mix.q_ur);
        if (w == 0.0) continue;
        fn(w, i - j, j, m - i);
      }
    }
  }
}

}  // namespace mmrelay
