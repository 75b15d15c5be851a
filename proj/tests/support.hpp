#pragma once

// Shared fixtures for the unit tests.

#include <random>

#include "mmrelay/channel.hpp"
#include "mmrelay/queueing.hpp"

namespace testing_support {

// A table with arbitrary entries: algebraic identities must hold for any table.
inline mmrelay::SuccessTable random_table(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mmrelay::SuccessTable t(n, 0, 1, seed);
  for (const auto& s : mmrelay::reachable_scenarios(n)) t.set(s, u(rng));
  return t;
}

inline mmrelay::StrategyMix random_mix(std::mt19937_64& rng, double max_d_a = 6.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  mmrelay::StrategyMix m;
  m.q_u = u(rng);
  m.q_uf = u(rng);
  m.q_ur = u(rng);
  m.q_r = u(rng);
  m.d_a = max_d_a * u(rng);
  return m;
}

// Small real table: cheap to build, physically meaningful.
inline mmrelay::SceneConfig small_config(int n = 3, int samples = 4000) {
  mmrelay::SceneConfig c;
  c.n_ues = n;
  c.n_shadow_samples = samples;
  return c;
}

}  // namespace testing_support
