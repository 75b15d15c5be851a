#include "mmrelay/oracle.hpp"

#include <stdexcept>

#include "mmrelay/numeric.hpp"

namespace mmrelay {

namespace {

constexpr int kMaxUes = 6;

enum UeState { silent = 0, fm = 1, fr = 2, br = 3 };

struct Expectations {
  std::vector<std::array<CompensatedSum, 2>> joint;
  // Expected successes per slot, by kind.
  CompensatedSum fm_ap, fr_relay, br_ap, br_relay_only;
};

// Enumerates all labelled UE states and success outcomes with the relay
// transmitting with probability relay_tx.
Expectations enumerate(const SuccessTable& t, const StrategyMix& mix, int n, double relay_tx) {
  if (n < 1 || n > kMaxUes) {
    throw std::invalid_argument("exact enumeration supports 1..6 UEs, got " + std::to_string(n));
  }
  const double q_tx = actual_tx_prob(mix);
  const double p_state[4] = {1.0 - q_tx, q_tx * mix.p_fm(), q_tx * mix.p_fr(), q_tx * mix.p_b()};

  Expectations ex;
  ex.joint.resize(static_cast<std::size_t>(n + 1));
  int total_configs = 1;
  for (int u = 0; u < n; ++u) total_configs *= 4;

  std::vector<int> state(static_cast<std::size_t>(n));
  for (int code = 0; code < total_configs; ++code) {
    double w = 1.0;
    int n_fm = 0, n_fr = 0, n_b = 0;
    for (int u = 0, c = code; u < n; ++u, c /= 4) {
      state[static_cast<std::size_t>(u)] = c % 4;
      w *= p_state[c % 4];
      n_fm += c % 4 == fm;
      n_fr += c % 4 == fr;
      n_b += c % 4 == br;
    }
    if (w == 0.0) continue;

    for (int ra = 0; ra < 2; ++ra) {
      const double w_ra = w * (ra ? relay_tx : 1.0 - relay_tx);
      if (w_ra == 0.0) continue;
      const bool active = ra == 1;
      // Independent Bernoulli outcomes: one per FD transmitter, two per BR
      // transmitter (relay, mmAP), one for the relay.
      std::vector<double> probs;
      std::vector<int> kind;  // 0 fm@ap, 1 fr@relay, 2 br@relay, 3 br@ap, 4 relay@ap
      for (int u = 0; u < n; ++u) {
        switch (state[static_cast<std::size_t>(u)]) {
          case fm:
            probs.push_back(t(Link::ue_to_ap, Scheme::FD, n_fm - 1, n_b, active));
            kind.push_back(0);
            break;
          case fr:
            probs.push_back(t(Link::ue_to_relay, Scheme::FD, n_fr - 1, n_b, active));
            kind.push_back(1);
            break;
          case br:
            probs.push_back(t(Link::ue_to_relay, Scheme::BR, n_fr, n_b - 1, active));
            kind.push_back(2);
            probs.push_back(t(Link::ue_to_ap, Scheme::BR, n_fm, n_b - 1, active));
            kind.push_back(3);
            break;
          default: break;
        }
      }
      if (active) {
        probs.push_back(t(Link::relay_to_ap, Scheme::FD, n_fm, n_b, false));
        kind.push_back(4);
      }
      const std::size_t bits = probs.size();
      for (std::uint32_t mask = 0; mask < (1u << bits); ++mask) {
        double p = w_ra;
        for (std::size_t b = 0; b < bits; ++b) {
          p *= (mask >> b) & 1u ? probs[b] : 1.0 - probs[b];
        }
        if (p == 0.0) continue;
        int admitted = 0;
        int departed = 0;
        int c_fm = 0, c_fr = 0, c_br_ap = 0, c_br_relay_only = 0;
        for (std::size_t b = 0; b < bits; ++b) {
          const bool ok = (mask >> b) & 1u;
          switch (kind[b]) {
            case 0: c_fm += ok; break;
            case 1: c_fr += ok; admitted += ok; break;
            case 2: {
              // BR outcomes come in (relay, mmAP) pairs.
              const bool ap_ok = (mask >> (b + 1)) & 1u;
              if (ok && !ap_ok) {
                ++admitted;
                ++c_br_relay_only;
              }
              break;
            }
            case 3: c_br_ap += ok; break;
            case 4: departed += ok; break;
          }
        }
        ex.joint[static_cast<std::size_t>(admitted)][static_cast<std::size_t>(departed)] += p;
        ex.fm_ap += p * c_fm;
        ex.fr_relay += p * c_fr;
        ex.br_ap += p * c_br_ap;
        ex.br_relay_only += p * c_br_relay_only;
      }
    }
  }
  return ex;
}

std::vector<double> admissions_marginal(const Expectations& ex) {
  std::vector<double> r;
  for (const auto& row : ex.joint) r.push_back(row[0].value() + row[1].value());
  return r;
}

double mean(const std::vector<double>& pmf) {
  CompensatedSum s;
  for (std::size_t k = 1; k < pmf.size(); ++k) s += static_cast<double>(k) * pmf[k];
  return s.value();
}

}  // namespace

double SlotOutcomeLaw::total() const {
  CompensatedSum s;
  for (const auto& row : joint) {
    s += row[0];
    s += row[1];
  }
  return s.value();
}

SlotOutcomeLaw enumerate_slot_outcomes(const SuccessTable& table, const StrategyMix& mix, int n,
                                       bool queue_nonempty) {
  const Expectations silent_relay = enumerate(table, mix, n, 0.0);
  const Expectations forced_relay = enumerate(table, mix, n, 1.0);
  const Expectations& actual =
      queue_nonempty ? enumerate(table, mix, n, mix.q_r) : silent_relay;

  SlotOutcomeLaw law;
  law.n = n;
  law.queue_nonempty = queue_nonempty;
  for (const auto& row : actual.joint) law.joint.push_back({row[0].value(), row[1].value()});
  law.r0 = admissions_marginal(silent_relay);
  const auto forced = admissions_marginal(forced_relay);
  for (std::size_t k = 0; k < law.r0.size(); ++k) {
    law.r1.push_back((1.0 - mix.q_r) * law.r0[k] + mix.q_r * forced[k]);
  }
  law.lambda0 = mean(law.r0);
  law.a_r = mean(forced);
  CompensatedSum delivered;
  for (const auto& row : forced_relay.joint) delivered += row[1].value();
  law.b_r = delivered.value();
  return law;
}

TransitionKernel enumerated_kernel(const SuccessTable& table, const StrategyMix& mix, int n) {
  const SlotOutcomeLaw empty = enumerate_slot_outcomes(table, mix, n, false);
  const SlotOutcomeLaw busy = enumerate_slot_outcomes(table, mix, n, true);
  TransitionKernel k;
  k.n = n;
  for (const auto& row : empty.joint) k.p0.push_back(row[0] + row[1]);
  k.p1.assign(static_cast<std::size_t>(n + 2), 0.0);
  for (int a = 0; a <= n; ++a) {
    const auto& row = busy.joint[static_cast<std::size_t>(a)];
    k.p1[static_cast<std::size_t>(a + 1)] += row[0];
    k.p1[static_cast<std::size_t>(a)] += row[1];
  }
  return k;
}

EnumeratedThroughput enumerate_throughput(const SuccessTable& table, const StrategyMix& mix, int n) {
  EnumeratedThroughput out;
  const double q_tx = actual_tx_prob(mix);
  const double tx_fm = n * q_tx * mix.p_fm();
  const double tx_fr = n * q_tx * mix.p_fr();
  const double tx_b = n * q_tx * mix.p_b();
  const auto ratio = [](const CompensatedSum& s, double d) { return d > 0.0 ? s.value() / d : 0.0; };
  for (int ra = 0; ra < 2; ++ra) {
    const Expectations ex = enumerate(table, mix, n, ra);
    out.ud_f[static_cast<std::size_t>(ra)] = ratio(ex.fm_ap, tx_fm);
    out.ur_f[static_cast<std::size_t>(ra)] = ratio(ex.fr_relay, tx_fr);
    out.ud_b[static_cast<std::size_t>(ra)] = ratio(ex.br_ap, tx_b);
    out.ur_b[static_cast<std::size_t>(ra)] = ratio(ex.br_relay_only, tx_b);
  }
  return out;
}

}  // namespace mmrelay
