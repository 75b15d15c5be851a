#include "mmrelay/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmrelay {

double StrategyMix::probability(Strategy s) const {
  switch (s) {
    case Strategy::fm: return p_fm();
    case Strategy::fr: return p_fr();
    case Strategy::b: return p_b();
  }
  return 0.0;
}

double StrategyMix::alignment(Strategy s) const {
  return s == Strategy::b ? d_a_br.value_or(d_a) : d_a;
}

StrategyMix mix_from(const SceneConfig& cfg) {
  StrategyMix m;
  m.q_u = cfg.q_u;
  m.q_uf = cfg.q_uf;
  m.q_ur = cfg.q_ur;
  m.q_r = cfg.q_r;
  m.d_a = cfg.d_a;
  m.d_a_br = cfg.d_a_br;
  return m;
}

double repeat_probability(const StrategyMix& mix) {
  const double a = mix.p_fm();
  const double b = mix.p_fr();
  const double c = mix.p_b();
  return a * a + b * b + c * c;
}

double actual_tx_prob(const StrategyMix& mix) {
  double overhead = 0.0;
  for (Strategy s : {Strategy::fm, Strategy::fr, Strategy::b}) {
    const double p = mix.probability(s);
    overhead += p * (1.0 - p) * mix.alignment(s);
  }
  return mix.q_u / (1.0 + mix.q_u * overhead);
}

namespace {

// Admission probabilities of one configuration: an FD->relay packet and a BR
// packet (relay decodes it, the mmAP does not).
struct AdmissionProbs {
  double fd = 0.0;
  double br = 0.0;
};

AdmissionProbs admissions(const SuccessTable& t, int n_fm, int n_fr, int n_b, bool ra) {
  AdmissionProbs a;
  if (n_fr > 0) a.fd = t(Link::ue_to_relay, Scheme::FD, n_fr - 1, n_b, ra);
  if (n_b > 0) {
    a.br = t(Link::ue_to_relay, Scheme::BR, n_fr, n_b - 1, ra) *
           (1.0 - t(Link::ue_to_ap, Scheme::BR, n_fm, n_b - 1, ra));
  }
  return a;
}

void check_table(const SuccessTable& table, int n) {
  if (n < 1) throw std::invalid_argument("number of UEs must be positive");
  if (table.n_ues() < n) {
    throw std::invalid_argument("success table built for " + std::to_string(table.n_ues()) +
                                " UEs cannot serve " + std::to_string(n));
  }
}

}  // namespace

std::vector<double> batch_arrival_pmf(const SuccessTable& table, const StrategyMix& mix, int n,
                                      bool relay_active) {
  check_table(table, n);
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(n + 1));
  for_each_config(n, mix, [&](double w, int n_fm, int n_fr, int n_b) {
    const AdmissionProbs a = admissions(table, n_fm, n_fr, n_b, relay_active);
    const auto pmf = binomial_sum_pmf(n_fr, a.fd, n_b, a.br);
    for (std::size_t k = 0; k < pmf.size(); ++k) acc[k] += w * pmf[k];
  });
  std::vector<double> out;
  out.reserve(acc.size());
  for (const auto& s : acc) out.push_back(s.value());
  return out;
}

ArrivalRates arrival_rates(const SuccessTable& table, const StrategyMix& mix, int n) {
  check_table(table, n);
  CompensatedSum l0;
  CompensatedSum ar;
  for_each_config(n, mix, [&](double w, int n_fm, int n_fr, int n_b) {
    const AdmissionProbs a0 = admissions(table, n_fm, n_fr, n_b, false);
    const AdmissionProbs a1 = admissions(table, n_fm, n_fr, n_b, true);
    l0 += w * (n_fr * a0.fd + n_b * a0.br);
    ar += w * (n_fr * a1.fd + n_b * a1.br);
  });
  return {l0.value(), ar.value()};
}

ServiceRate service_rate(const SuccessTable& table, const StrategyMix& mix, int n) {
  check_table(table, n);
  CompensatedSum b;
  for_each_config(n, mix, [&](double w, int n_fm, int, int n_b) {
    b += w * table(Link::relay_to_ap, Scheme::FD, n_fm, n_b, false);
  });
  return {b.value(), mix.q_r * b.value()};
}

bool Stability::is_stable(double q_r) const {
  if (lambda0 == 0.0 && a_r == 0.0) return true;
  const double lambda1 = (1.0 - q_r) * lambda0 + q_r * a_r;
  return lambda1 < q_r * b_r;
}

Stability stability(double lambda0, double a_r, double b_r) {
  Stability s;
  s.lambda0 = lambda0;
  s.a_r = a_r;
  s.b_r = b_r;
  if (lambda0 == 0.0) {
    s.q_rmin = 0.0;
    s.unstable_for_all = a_r > 0.0 && a_r >= b_r;
    return s;
  }
  const double denom = lambda0 + b_r - a_r;
  if (denom <= 0.0) {
    s.q_rmin = std::numeric_limits<double>::infinity();
    s.unstable_for_all = true;
    return s;
  }
  s.q_rmin = lambda0 / denom;
  s.unstable_for_all = s.q_rmin >= 1.0;
  return s;
}

double TransitionKernel::drift() const {
  CompensatedSum d(-busy(-1));
  for (int k = 1; k <= n; ++k) d += k * busy(k);
  return d.value();
}

double TransitionKernel::lambda0() const {
  CompensatedSum l;
  for (int k = 1; k <= n; ++k) l += k * empty(k);
  return l.value();
}

TransitionKernel transition_kernel(const SuccessTable& table, const StrategyMix& mix, int n) {
  check_table(table, n);
  const auto sz = static_cast<std::size_t>(n + 2);
  std::vector<CompensatedSum> r0(sz), succ(sz), fail(sz);
  for_each_config(n, mix, [&](double w, int n_fm, int n_fr, int n_b) {
    const AdmissionProbs a0 = admissions(table, n_fm, n_fr, n_b, false);
    const AdmissionProbs a1 = admissions(table, n_fm, n_fr, n_b, true);
    const double p_rd = table(Link::relay_to_ap, Scheme::FD, n_fm, n_b, false);
    const auto pmf0 = binomial_sum_pmf(n_fr, a0.fd, n_b, a0.br);
    const auto pmf1 = binomial_sum_pmf(n_fr, a1.fd, n_b, a1.br);
    for (std::size_t k = 0; k < pmf0.size(); ++k) {
      r0[k] += w * pmf0[k];
      succ[k] += w * p_rd * pmf1[k];
      fail[k] += w * (1.0 - p_rd) * pmf1[k];
    }
  });

  TransitionKernel kern;
  kern.n = n;
  kern.p0.resize(static_cast<std::size_t>(n + 1));
  kern.p1.assign(static_cast<std::size_t>(n + 2), 0.0);
  const double q_r = mix.q_r;
  for (int k = 0; k <= n; ++k) kern.p0[static_cast<std::size_t>(k)] = r0[static_cast<std::size_t>(k)].value();
  kern.p1[0] = q_r * succ[0].value();
  CompensatedSum closure(1.0);
  closure -= kern.p1[0];
  for (int k = 1; k <= n; ++k) {
    const auto u = static_cast<std::size_t>(k);
    const double v = (1.0 - q_r) * r0[u].value() + q_r * (fail[u].value() + succ[u + 1].value());
    kern.p1[u + 1] = v;
    closure -= v;
  }
  const double p10 = closure.value();
  if (p10 < -1e-12) {
    throw std::runtime_error("transition kernel closure is negative (" + std::to_string(p10) + ")");
  }
  kern.p1[1] = std::max(0.0, p10);
  return kern;
}

std::optional<double> prob_empty(const TransitionKernel& kernel, double lambda0) {
  if (lambda0 == 0.0) return 1.0;
  const double drift = kernel.drift();
  if (!(drift < 0.0)) return std::nullopt;
  return -drift / (lambda0 - drift);
}

std::optional<double> avg_queue_size(const TransitionKernel& kernel, double lambda0) {
  if (lambda0 == 0.0) return 0.0;
  const double drift = kernel.drift();
  if (!(drift < 0.0)) return std::nullopt;
  CompensatedSum m0;
  CompensatedSum m1;
  for (int k = 1; k <= kernel.n; ++k) {
    m0 += k * (k + 3.0) * kernel.empty(k);
    m1 += k * (k + 3.0) * kernel.busy(k);
  }
  const double num = drift * m0.value() + lambda0 * (2.0 * kernel.busy(-1) - m1.value());
  const double den = 2.0 * drift * (lambda0 - drift);
  return num / den;
}

std::vector<double> stationary_numeric(const TransitionKernel& kernel, double tail_tolerance,
                                       std::size_t max_states) {
  const int n = kernel.n;
  const double down = kernel.busy(-1);
  // tail0[j] = P(+k > j | empty), tail1[j] = P(+k > j | busy), j = 0..n.
  std::vector<double> tail0(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<double> tail1(static_cast<std::size_t>(n + 1), 0.0);
  for (int j = n - 1; j >= 0; --j) {
    const auto u = static_cast<std::size_t>(j);
    tail0[u] = tail0[u + 1] + kernel.empty(j + 1);
    tail1[u] = tail1[u + 1] + kernel.busy(j + 1);
  }
  if (tail0[0] == 0.0) return {1.0};
  if (!(kernel.drift() < 0.0) || down <= 0.0) {
    throw std::runtime_error("stationary_numeric: queue is not stable");
  }

  // Asymptotic decay rate: root in (0,1) of sum_k p1_k r^{-k} = 1.
  const auto f = [&](double r) {
    double s = down * r;
    double pw = 1.0;
    for (int k = 0; k <= n; ++k) {
      s += kernel.busy(k) / pw;
      pw *= r;
    }
    return s - 1.0;
  };
  // f > 0 near 0 when some p1_k, k >= 1, is positive; f < 0 just below 1
  // because f'(1) = -drift > 0.
  double decay = 0.0;
  if (tail1[0] > 0.0) {
    double lo = 1e-12;
    double hi = 1.0 - 1e-15;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) > 0.0 ? lo : hi) = mid;
    }
    decay = hi;
  }

  // Cut equations between levels j and j+1:
  // pi_{j+1} p1_{-1} = pi_0 tail0[j] + sum_{i=max(1,j-n+1)}^{j} pi_i tail1[j-i].
  std::vector<double> pi{1.0};
  CompensatedSum mass(1.0);
  CompensatedSum mean;
  for (std::size_t j = 0;; ++j) {
    if (pi.size() >= max_states) {
      throw std::runtime_error("stationary_numeric: state budget exhausted");
    }
    double flow = j <= static_cast<std::size_t>(n) ? pi[0] * tail0[j] : 0.0;
    const std::size_t first = j + 1 >= static_cast<std::size_t>(n) ? j + 1 - static_cast<std::size_t>(n) : 0;
    for (std::size_t i = std::max<std::size_t>(1, first); i <= j; ++i) {
      flow += pi[i] * tail1[j - i];
    }
    const double next = flow / down;
    pi.push_back(next);
    mass += next;
    mean += static_cast<double>(j + 1) * next;

    if (j + 1 < static_cast<std::size_t>(n) + 1) continue;
    // Remaining mass is bounded through the recent window and the decay rate.
    double window = 0.0;
    for (std::size_t i = pi.size() - static_cast<std::size_t>(n); i < pi.size(); ++i) {
      window = std::max(window, pi[i]);
    }
    if (window == 0.0) break;
    if (decay > 0.0 && decay < 1.0) {
      const double level = static_cast<double>(pi.size());
      const double g = decay / (1.0 - decay);
      const double tail_mass = window * static_cast<double>(n) * g;
      const double tail_mean = tail_mass * (level + 1.0 / (1.0 - decay));
      if (tail_mass < tail_tolerance * mass.value() && tail_mean < tail_tolerance * mean.value()) {
        break;
      }
    }
  }
  const double total = mass.value();
  for (double& v : pi) v /= total;
  return pi;
}

QueueReport analyze_queue(const SuccessTable& table, const StrategyMix& mix, int n) {
  QueueReport q;
  q.q_tx = actual_tx_prob(mix);
  const ArrivalRates ar = arrival_rates(table, mix, n);
  const ServiceRate sr = service_rate(table, mix, n);
  const Stability st = stability(ar.lambda0, ar.a_r, sr.b_r);
  q.lambda0 = ar.lambda0;
  q.a_r = ar.a_r;
  q.lambda1 = ar.lambda1(mix.q_r);
  q.b_r = sr.b_r;
  q.mu_r = sr.mu_r;
  q.q_rmin = st.q_rmin;
  q.unstable_for_all = st.unstable_for_all;
  const TransitionKernel kern = transition_kernel(table, mix, n);
  q.drift = kern.drift();
  const auto p0 = prob_empty(kern, q.lambda0);
  const auto qbar = avg_queue_size(kern, q.lambda0);
  q.stable = st.is_stable(mix.q_r) && p0.has_value() && qbar.has_value();
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (!q.stable) {
    q.p_empty = 0.0;
    q.q_bar = inf;
    q.lambda_r = q.lambda1;
    q.d_q = inf;
    q.d_rel = inf;
    return q;
  }
  q.p_empty = *p0;
  q.q_bar = *qbar;
  q.lambda_r = q.p_empty * q.lambda0 + (1.0 - q.p_empty) * q.lambda1;
  q.d_q = q.lambda_r > 0.0 ? q.q_bar / q.lambda_r : 0.0;
  q.d_rel = q.mu_r > 0.0 ? q.d_q + 1.0 / q.mu_r : inf;
  return q;
}

}  // namespace mmrelay
