#include <doctest.h>

#include <cmath>
#include <random>

#include "mmrelay/metrics.hpp"
#include "mmrelay/oracle.hpp"
#include "support.hpp"

using namespace mmrelay;
using testing_support::random_mix;
using testing_support::random_table;
using testing_support::small_config;

namespace {

StrategyMix mix_of(double q_u, double q_uf, double q_ur, double q_r = 1.0, double d_a = 0.0) {
  StrategyMix m;
  m.q_u = q_u;
  m.q_uf = q_uf;
  m.q_ur = q_ur;
  m.q_r = q_r;
  m.d_a = d_a;
  return m;
}

struct Analysed {
  QueueReport q;
  ThroughputComponents c;
};

Analysed analyse(const SuccessTable& t, const StrategyMix& m, int n) {
  Analysed a;
  a.q = analyze_queue(t, m, n);
  a.c = throughput_components(t, m, n, a.q.stable ? 1 - a.q.p_empty : 1.0);
  return a;
}

}  // namespace

TEST_CASE("throughput components in degenerate mixes") {
  const SuccessTable t = random_table(3, 81);
  const ThroughputComponents one = throughput_components(t, mix_of(0.4, 1, 0, 0), 1, 0.0);
  CHECK(one.t_ud_f == doctest::Approx(t(Link::ue_to_ap, Scheme::FD, 0, 0, false)));
  CHECK(one.t_u(mix_of(0.4, 1, 0)) == doctest::Approx(one.t_ud_f));
  CHECK(one.relay_flow(mix_of(0.4, 1, 0)) == 0.0);

  const StrategyMix br = mix_of(0.4, 0, 0.5);
  const ThroughputComponents b = throughput_components(t, br, 3, 0.3);
  CHECK(b.t_u(br) == doctest::Approx(b.t_ud_b + b.t_ur_b));
  CHECK(b.relay_flow(br) == doctest::Approx(b.t_ur_b));
}

TEST_CASE("throughput parts equal the enumerated delivery counts") {
  std::mt19937_64 rng(12);
  for (int n = 1; n <= 3; ++n) {
    const SuccessTable t = random_table(n, rng());
    const StrategyMix m = random_mix(rng);
    const ThroughputParts p = throughput_parts(t, m, n);
    const EnumeratedThroughput e = enumerate_throughput(t, m, n);
    for (int r = 0; r < 2; ++r) {
      CHECK(std::fabs(p.ud_f[r] - e.ud_f[r]) <= 1e-12);
      CHECK(std::fabs(p.ud_b[r] - e.ud_b[r]) <= 1e-12);
      CHECK(std::fabs(p.ur_f[r] - e.ur_f[r]) <= 1e-12);
      CHECK(std::fabs(p.ur_b[r] - e.ur_b[r]) <= 1e-12);
    }
  }
}

TEST_CASE("aggregate throughput, flow conservation and boundary continuity") {
  const SuccessTable t = random_table(5, 91);
  CHECK(aggregate_throughput(analyse(t, mix_of(0, 0.5, 0.5), 5).c, mix_of(0, 0.5, 0.5), 5,
                             analyse(t, mix_of(0, 0.5, 0.5), 5).q) == 0.0);

  std::mt19937_64 rng(13);
  int stable = 0, unstable = 0;
  for (int i = 0; i < 300; ++i) {
    const StrategyMix m = random_mix(rng);
    const Analysed a = analyse(t, m, 5);
    const double T = aggregate_throughput(a.c, m, 5, a.q);
    CHECK(T >= 0.0);
    CHECK(T <= 5 * a.q.q_tx + a.q.mu_r + 1e-12);
    for (double x : {a.c.t_ud_f, a.c.t_ud_b, a.c.t_ur_f, a.c.t_ur_b}) CHECK((x >= 0 && x <= 1));
    if (a.q.stable) {
      ++stable;
      CHECK(std::fabs(5 * a.q.q_tx * a.c.relay_flow(m) - a.q.lambda_r) <= 1e-9);
    } else {
      ++unstable;
      CHECK(T == doctest::Approx(5 * a.q.q_tx * (m.p_fm() * a.c.t_ud_f + m.p_b() * a.c.t_ud_b) + a.q.mu_r));
    }

    // Both throughput forms agree at q_r = q_rmin.
    const Stability s = stability(a.q.lambda0, a.q.a_r, a.q.b_r);
    if (!s.unstable_for_all && s.q_rmin > 0) {
      StrategyMix edge = m;
      edge.q_r = s.q_rmin;
      QueueReport q = analyze_queue(t, edge, 5);
      const ThroughputComponents c = throughput_components(t, edge, 5, 1.0);
      q.stable = true;
      const double t_stable = aggregate_throughput(c, edge, 5, q);
      q.stable = false;
      const double t_unstable = aggregate_throughput(c, edge, 5, q);
      CHECK(std::fabs(t_stable - t_unstable) <= 1e-6);
    }
  }
  CHECK(stable > 20);
  CHECK(unstable > 20);
}

TEST_CASE("relay delay") {
  QueueReport q;
  q.stable = true;
  q.q_bar = 0.0;
  q.lambda_r = 0.2;
  q.mu_r = 1.0;
  q.d_q = 0.0;
  q.d_rel = 1.0;
  CHECK(relay_delay(q) == doctest::Approx(1.0));
  q.stable = false;
  CHECK(std::isinf(relay_delay(q)));

  const SuccessTable t = random_table(4, 95);
  StrategyMix m = mix_of(0.5, 0.3, 0.8);
  const QueueReport base = analyze_queue(t, m, 4);
  const Stability s = stability(base.lambda0, base.a_r, base.b_r);
  REQUIRE(s.q_rmin > 0.05);
  REQUIRE(s.q_rmin < 0.95);
  double prev = 0.0;
  for (double gap : {1.0, 0.5, 0.2, 0.05, 0.01, 1e-3, 1e-5}) {
    m.q_r = s.q_rmin + gap * (1 - s.q_rmin);
    const double d = relay_delay(analyze_queue(t, m, 4));
    CHECK(d > prev);
    prev = d;
  }
  CHECK(prev > 1e3);
}

TEST_CASE("delay closed form") {
  const SuccessTable t = random_table(3, 97);

  SUBCASE("single UE with one strategy is geometric") {
    const StrategyMix m = mix_of(0.3, 1, 0);
    const Analysed a = analyse(t, m, 1);
    const DelayResult d = packet_delay(a.c, m, a.q);
    CHECK(d.d == doctest::Approx(1 / (0.3 * t(Link::ue_to_ap, Scheme::FD, 0, 0, false))));
    CHECK(d.breakdown.alignment == 0.0);
  }

  SUBCASE("recursion, breakdown and variable alignment agree") {
    std::mt19937_64 rng(14);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      const StrategyMix m = random_mix(rng);
      const Analysed a = analyse(t, m, 3);
      const DelayResult d = packet_delay(a.c, m, a.q);
      if (!d.finite) {
        CHECK(std::isinf(d.d));
        continue;
      }
      ++checked;
      CHECK(std::fabs(d.d - d.d_recursion) <= 1e-9 * std::max(1.0, d.d));
      CHECK(std::fabs(d.breakdown.sum() - d.d) <= 1e-9 * std::max(1.0, d.d));
      CHECK(d.d >= 1.0);
      for (double x : {d.breakdown.ue_tx, d.breakdown.relay_tx, d.breakdown.queueing, d.breakdown.alignment}) {
        CHECK(x >= -1e-12);
      }
      const double d3 = packet_delay_variable_alignment(a.c, m, a.q, m.d_a, m.d_a);
      CHECK(std::fabs(d3 - d.d) <= 1e-12 * std::max(1.0, d.d));
      StrategyMix zero = m;
      zero.d_a = 0;
      CHECK(packet_delay_variable_alignment(a.c, m, a.q, 0, 0) ==
            doctest::Approx(packet_delay(a.c, zero, a.q).d).epsilon(1e-12));
    }
    CHECK(checked > 100);
  }
}

TEST_CASE("alignment durations from beam counts") {
  const double five = deg_to_rad(5);
  const AlignmentDurations a = alignment_durations(five, five, 100, 16);
  CHECK(a.d_a_f == doctest::Approx(72.0 * 72 / 1600));
  CHECK(a.d_a_b / a.d_a_f == doctest::Approx(72.0));
  CHECK(alignment_durations(five, five, 100, 1e12).d_a_f < 1e-6);
}

TEST_CASE("regime classification") {
  QueueReport q;
  q.stable = false;
  CHECK(classify(q) == Regime::unstable);
  q.stable = true;
  q.mu_r = 0.5;
  q.lambda1 = 0.499;
  CHECK(classify(q) == Regime::near_instability);
  q.lambda1 = 0.3;
  CHECK(classify(q) == Regime::stable);
}

TEST_CASE("delay does not grow when direct or relay-to-AP links improve") {
  SceneConfig c = small_config(4, 3000);
  const SuccessTable t = build_success_table(c);
  for (double q_u : {0.1, 0.4}) {
    for (double q_uf : {0.0, 0.5, 1.0}) {
      c.q_u = q_u;
      c.q_uf = q_uf;
      c.d_a = 2;
      const Evaluation base = evaluate(c, t);
      REQUIRE(base.queue.stable);
      for (const auto& [s, p] : t.entries()) {
        if (s.link == Link::ue_to_relay) continue;
        SuccessTable better = t;
        better.set(s, std::min(1.0, p + 0.02));
        CHECK(evaluate(c, better).perf.d_total <= base.perf.d_total + 1e-12);
      }
    }
  }
}

TEST_CASE("evaluate at defaults and with a strict SINR threshold") {
  SceneConfig c;
  c.q_u = 0.5;
  c.gamma_db = 15;
  const Evaluation e = evaluate(c, build_success_table(c));
  REQUIRE(e.queue.stable);
  const DelayBreakdown& b = e.perf.d_breakdown;
  CHECK(b.ue_tx + b.alignment > b.queueing);
  CHECK(b.ue_tx > b.relay_tx);
  CHECK(e.perf.d_total == doctest::Approx(b.sum()));

  SceneConfig a;
  a.q_ur = 0;
  a.q_uf = 1;
  const Evaluation direct = evaluate(a, build_success_table(small_config(10, 2000)));
  CHECK(direct.queue.q_rmin == 0.0);
  CHECK(direct.queue.stable);
}
