#pragma once

#include <array>
#include <vector>

#include "mmrelay/channel.hpp"
#include "mmrelay/queueing.hpp"

namespace mmrelay {

/// Exact per-slot law of relay admissions and departures, obtained by
/// enumerating every UE state and every success outcome.
struct SlotOutcomeLaw {
  int n = 0;
  bool queue_nonempty = false;
  /// joint[k][d]: k admissions and d relay deliveries (d in {0,1}).
  std::vector<std::array<double, 2>> joint;
  std::vector<double> r0;  // admissions with the relay silent
  std::vector<double> r1;  // admissions in a non-empty slot (q_r mixed)
  double lambda0 = 0.0;
  double a_r = 0.0;
  double b_r = 0.0;

  double total() const;
};

/// Throws std::invalid_argument for n > 6.
SlotOutcomeLaw enumerate_slot_outcomes(const SuccessTable& table, const StrategyMix& mix, int n,
                                       bool queue_nonempty);

/// Kernel assembled from the two enumerated laws.
TransitionKernel enumerated_kernel(const SuccessTable& table, const StrategyMix& mix, int n);

/// Per-transmission success probabilities recovered from enumerated expected
/// delivery counts, for the relay silent ([0]) and transmitting ([1]).
struct EnumeratedThroughput {
  std::array<double, 2> ud_f{};
  std::array<double, 2> ud_b{};
  std::array<double, 2> ur_f{};
  std::array<double, 2> ur_b{};
};

EnumeratedThroughput enumerate_throughput(const SuccessTable& table, const StrategyMix& mix, int n);

}  // namespace mmrelay
