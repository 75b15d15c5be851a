#include <doctest.h>

#include <cmath>
#include <random>

#include "mmrelay/numeric.hpp"
#include "mmrelay/queueing.hpp"
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

// One UE following the alignment rules slot by slot: long-run transmit frequency.
double renewal_tx_frequency(const StrategyMix& m, long long slots, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto d_a = static_cast<long long>(std::ceil(m.d_a));
  int last = -1;
  long long aligning = 0, tx = 0;
  for (long long t = 0; t < slots; ++t) {
    if (aligning > 0) {
      if (--aligning == 0) ++tx;
      continue;
    }
    if (u(rng) >= m.q_u) continue;
    const double r = u(rng);
    const int s = r < m.p_fm() ? 0 : (r < m.p_fm() + m.p_fr() ? 1 : 2);
    const bool change = last != -1 && s != last;
    last = s;
    if (change && d_a > 0) {
      aligning = d_a;
    } else {
      ++tx;
    }
  }
  return static_cast<double>(tx) / static_cast<double>(slots);
}

double sum(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("strategy repeat probability") {
  CHECK(repeat_probability(mix_of(0.5, 1, 0)) == 1.0);
  CHECK(repeat_probability(mix_of(0.5, 0, 0.3)) == 1.0);
  CHECK(repeat_probability(mix_of(0.5, 0.5, 0.5)) == doctest::Approx(0.375));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const double p = repeat_probability(random_mix(rng));
    CHECK(p >= 1.0 / 3 - 1e-12);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("transmit probability under alignment") {
  CHECK(actual_tx_prob(mix_of(0.9, 0.5, 0.5, 1, 0)) == 0.9);
  CHECK(actual_tx_prob(mix_of(0.5, 1, 1, 1, 7)) == 0.5);
  const StrategyMix m = mix_of(0.5, 0.5, 0.5, 1, 5);
  CHECK(actual_tx_prob(m) == doctest::Approx(0.5 / 2.5625));
  CHECK(renewal_tx_frequency(m, 10'000'000, 11) == doctest::Approx(actual_tx_prob(m)).epsilon(5e-3));
  const StrategyMix w = mix_of(0.2, 0.3, 0.7, 1, 3);
  CHECK(renewal_tx_frequency(w, 10'000'000, 12) == doctest::Approx(actual_tx_prob(w)).epsilon(5e-3));
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const StrategyMix r = random_mix(rng);
    CHECK(actual_tx_prob(r) <= r.q_u);
  }
}

TEST_CASE("strategy splits are a probability distribution") {
  const StrategyMix m = mix_of(0.37, 0.6, 0.2, 1, 2);
  for (int pool : {0, 1, 4, 9}) {
    CompensatedSum total;
    double mean_b = 0;
    for_each_config(pool, m, [&](double w, int fm, int fr, int b) {
      CHECK(fm + fr + b <= pool);
      total += w;
      mean_b += w * b;
    });
    CHECK(total.value() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(mean_b == doctest::Approx(pool * actual_tx_prob(m) * m.p_b()));
  }
}

TEST_CASE("batch arrivals") {
  const SuccessTable t = random_table(4, 21);
  CHECK(batch_arrival_pmf(t, mix_of(0.7, 1, 0), 4, false)[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(batch_arrival_pmf(t, mix_of(0.7, 1, 0), 4, true)[0] == doctest::Approx(1.0).epsilon(1e-14));

  const StrategyMix one = mix_of(0.4, 1, 1);
  const auto r = batch_arrival_pmf(t, one, 1, false);
  CHECK(r[1] == doctest::Approx(0.4 * t(Link::ue_to_relay, Scheme::FD, 0, 0, false)));
  CHECK(r[0] == doctest::Approx(1 - r[1]));

  std::mt19937_64 rng(7);
  for (int n = 1; n <= 4; ++n) {
    const StrategyMix m = random_mix(rng);
    CHECK(sum(batch_arrival_pmf(t, m, n, false)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sum(batch_arrival_pmf(t, m, n, true)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("single-UE rates expand by hand") {
  const SuccessTable t = random_table(1, 31);
  const StrategyMix m = mix_of(0.6, 0.7, 0.4, 0.8, 2);
  const double q = actual_tx_prob(m);
  const auto P = [&](Link l, Scheme s, int f, int b, bool ra) { return t(l, s, f, b, ra); };
  const double lambda0 = q * (m.p_fr() * P(Link::ue_to_relay, Scheme::FD, 0, 0, false) +
                              m.p_b() * P(Link::ue_to_relay, Scheme::BR, 0, 0, false) *
                                  (1 - P(Link::ue_to_ap, Scheme::BR, 0, 0, false)));
  const double a_r = q * (m.p_fr() * P(Link::ue_to_relay, Scheme::FD, 0, 0, true) +
                          m.p_b() * P(Link::ue_to_relay, Scheme::BR, 0, 0, true) *
                              (1 - P(Link::ue_to_ap, Scheme::BR, 0, 0, true)));
  const double b_r = (1 - q) * P(Link::relay_to_ap, Scheme::FD, 0, 0, false) +
                     q * (m.p_fm() * P(Link::relay_to_ap, Scheme::FD, 1, 0, false) +
                          m.p_fr() * P(Link::relay_to_ap, Scheme::FD, 0, 0, false) +
                          m.p_b() * P(Link::relay_to_ap, Scheme::FD, 0, 1, false));
  const ArrivalRates ar = arrival_rates(t, m, 1);
  const ServiceRate sr = service_rate(t, m, 1);
  CHECK(ar.lambda0 == doctest::Approx(lambda0).epsilon(1e-14));
  CHECK(ar.a_r == doctest::Approx(a_r).epsilon(1e-14));
  CHECK(sr.b_r == doctest::Approx(b_r).epsilon(1e-14));
  CHECK(sr.mu_r == doctest::Approx(0.8 * b_r).epsilon(1e-14));
  CHECK(ar.lambda1(0.8) == doctest::Approx(0.2 * lambda0 + 0.8 * a_r));
}

TEST_CASE("rates in limiting cases") {
  const SuccessTable t = random_table(3, 41);
  CHECK(arrival_rates(t, mix_of(0.5, 1, 0), 3).lambda0 == 0.0);
  CHECK(service_rate(t, mix_of(0, 0.5, 0.5, 0.7), 3).mu_r ==
        doctest::Approx(0.7 * t(Link::relay_to_ap, Scheme::FD, 0, 0, false)));
  CHECK(service_rate(t, mix_of(0.5, 0.5, 0.5, 0), 3).mu_r == 0.0);

  SceneConfig c = small_config(3, 2000);
  c.alpha = 0.0;
  c.beta = 0.0;
  const SuccessTable clean = build_success_table(c);
  const ArrivalRates ar = arrival_rates(clean, mix_of(0.4, 0.5, 0.5), 3);
  CHECK(ar.a_r == doctest::Approx(ar.lambda0).epsilon(1e-14));
}

TEST_CASE("stability threshold") {
  const Stability none = stability(0.0, 0.0, 0.5);
  CHECK(none.q_rmin == 0.0);
  CHECK(none.is_stable(0.01));

  const Stability same = stability(0.3, 0.3, 0.8);
  CHECK(same.q_rmin == doctest::Approx(0.3 / 0.8));

  const Stability s = stability(0.3, 0.5, 0.9);
  const double q = s.q_rmin;
  CHECK(((1 - q) * 0.3 + q * 0.5) == doctest::Approx(q * 0.9));
  CHECK(s.is_stable(q + 1e-6));
  CHECK(!s.is_stable(q - 1e-6));

  const Stability hopeless = stability(0.6, 0.9, 0.5);
  CHECK(hopeless.unstable_for_all);
  CHECK(!hopeless.is_stable(1.0));
}

TEST_CASE("transition kernel") {
  const SuccessTable t = random_table(3, 51);
  const TransitionKernel idle = transition_kernel(t, mix_of(0.0, 0.5, 0.5, 0.6), 3);
  const double p_rd = t(Link::relay_to_ap, Scheme::FD, 0, 0, false);
  CHECK(idle.busy(-1) == doctest::Approx(0.6 * p_rd));
  CHECK(idle.busy(0) == doctest::Approx(1 - 0.6 * p_rd));
  CHECK(idle.empty(0) == 1.0);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 30; ++i) {
    const StrategyMix m = random_mix(rng);
    const TransitionKernel k = transition_kernel(t, m, 3);
    CHECK(sum(k.p0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sum(k.p1) == doctest::Approx(1.0).epsilon(1e-12));
    for (double p : k.p0) CHECK((p >= 0.0 && p <= 1.0));
    for (double p : k.p1) CHECK((p >= 0.0 && p <= 1.0));
    const double drift = arrival_rates(t, m, 3).lambda1(m.q_r) - service_rate(t, m, 3).mu_r;
    CHECK(std::fabs(k.drift() - drift) <= 1e-12);
  }
}

TEST_CASE("stationary solver") {
  const SuccessTable t = random_table(2, 61);
  const auto pi = stationary_numeric(transition_kernel(t, mix_of(0.0, 0.5, 0.5), 2));
  CHECK(pi[0] == doctest::Approx(1.0));

  TransitionKernel flip;
  flip.n = 1;
  flip.p0 = {0.0, 1.0};
  flip.p1 = {1.0, 0.0, 0.0};
  const auto half = stationary_numeric(flip);
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));

  TransitionKernel up = flip;
  up.p1 = {0.2, 0.0, 0.8};
  CHECK_THROWS(stationary_numeric(up));
}

TEST_CASE("closed-form queue measures against the stationary solver") {
  SceneConfig c;
  const SuccessTable t = build_success_table(c);
  for (auto [q_u, d_a] : {std::pair{0.1, 0.0}, std::pair{0.5, 5.0}}) {
    StrategyMix m = mix_from(c);
    m.q_u = q_u;
    m.d_a = d_a;
    const TransitionKernel k = transition_kernel(t, m, 10);
    const double lambda0 = arrival_rates(t, m, 10).lambda0;
    const auto pi = stationary_numeric(k);
    double mean = 0;
    for (std::size_t i = 0; i < pi.size(); ++i) mean += static_cast<double>(i) * pi[i];
    REQUIRE(prob_empty(k, lambda0).has_value());
    CHECK(std::fabs(*prob_empty(k, lambda0) - pi[0]) <= 1e-6);
    CHECK(std::fabs(*avg_queue_size(k, lambda0) - mean) <= 1e-6 * mean);
    CHECK(*avg_queue_size(k, lambda0) >= 1 - *prob_empty(k, lambda0));
  }

  StrategyMix m = mix_from(c);
  m.q_uf = 0.0;
  const Stability s = stability(arrival_rates(t, m, 10).lambda0, arrival_rates(t, m, 10).a_r,
                                service_rate(t, m, 10).b_r);
  REQUIRE(s.q_rmin > 0.1);
  double prev = INFINITY;
  for (double q_r = s.q_rmin + 0.01; q_r <= 1.0; q_r += 0.05) {
    m.q_r = q_r;
    const QueueReport r = analyze_queue(t, m, 10);
    CHECK(r.stable);
    CHECK(r.q_bar <= prev);
    prev = r.q_bar;
  }
  m.q_r = s.q_rmin - 0.02;
  const TransitionKernel k = transition_kernel(t, m, 10);
  CHECK(!prob_empty(k, arrival_rates(t, m, 10).lambda0).has_value());
  CHECK(!avg_queue_size(k, arrival_rates(t, m, 10).lambda0).has_value());
  const QueueReport unstable = analyze_queue(t, m, 10);
  CHECK(!unstable.stable);
  CHECK(std::isinf(unstable.d_rel));
}

TEST_CASE("queue report limits") {
  const SuccessTable t = random_table(3, 71);
  const QueueReport empty = analyze_queue(t, mix_of(0.5, 1, 0), 3);
  CHECK(empty.q_rmin == 0.0);
  CHECK(empty.stable);
  CHECK(empty.p_empty == 1.0);
  CHECK(empty.q_bar == 0.0);

  const QueueReport r = analyze_queue(t, mix_of(0.3, 0.5, 0.5, 1.0), 3);
  REQUIRE(r.stable);
  CHECK(r.d_rel == doctest::Approx(r.d_q + 1 / r.mu_r));
  CHECK(r.q_tx == actual_tx_prob(mix_of(0.3, 0.5, 0.5)));
}
