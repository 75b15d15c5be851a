#include "mmrelay/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mmrelay/metrics.hpp"
#include "mmrelay/oracle.hpp"

namespace mmrelay {

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) e = std::max(e, std::fabs(a[i] - b[i]));
  return e;
}

double parts_diff(const ThroughputParts& a, const EnumeratedThroughput& b) {
  double e = 0.0;
  for (int r = 0; r < 2; ++r) {
    e = std::max({e, std::fabs(a.ud_f[r] - b.ud_f[r]), std::fabs(a.ud_b[r] - b.ud_b[r]),
                  std::fabs(a.ur_f[r] - b.ur_f[r]), std::fabs(a.ur_b[r] - b.ur_b[r])});
  }
  return e;
}

}  // namespace

std::vector<ValidationCheck> oracle_checks(const SuccessTable& table, const StrategyMix& mix, int n,
                                           const std::string& variant) {
  constexpr double tol = 1e-12;
  std::vector<ValidationCheck> out;
  const auto add = [&](const char* name, double err) { out.push_back({name, n, variant, err, tol}); };

  const SlotOutcomeLaw empty = enumerate_slot_outcomes(table, mix, n, false);
  const SlotOutcomeLaw busy = enumerate_slot_outcomes(table, mix, n, true);
  add("law_total", std::max(std::fabs(empty.total() - 1.0), std::fabs(busy.total() - 1.0)));

  const auto pmf0 = batch_arrival_pmf(table, mix, n, false);
  const auto pmf1 = batch_arrival_pmf(table, mix, n, true);
  std::vector<double> mixed(pmf0.size());
  for (std::size_t k = 0; k < mixed.size(); ++k) mixed[k] = (1.0 - mix.q_r) * pmf0[k] + mix.q_r * pmf1[k];
  add("arrivals_empty", max_abs_diff(pmf0, empty.r0));
  add("arrivals_busy", max_abs_diff(mixed, busy.r1));

  const ArrivalRates ar = arrival_rates(table, mix, n);
  const ServiceRate sr = service_rate(table, mix, n);
  add("lambda0", std::fabs(ar.lambda0 - empty.lambda0));
  add("a_r", std::fabs(ar.a_r - busy.a_r));
  add("b_r", std::fabs(sr.b_r - busy.b_r));

  const TransitionKernel k = transition_kernel(table, mix, n);
  const TransitionKernel ke = enumerated_kernel(table, mix, n);
  add("kernel", std::max(max_abs_diff(k.p0, ke.p0), max_abs_diff(k.p1, ke.p1)));
  add("drift", std::fabs(k.drift() - (ar.lambda1(mix.q_r) - sr.mu_r)));

  add("throughput_parts", parts_diff(throughput_parts(table, mix, n), enumerate_throughput(table, mix, n)));
  return out;
}

std::vector<ValidationCheck> model_checks(const SceneConfig& cfg, const SuccessTable& table) {
  std::vector<ValidationCheck> out;
  const int n = cfg.n_ues;
  const auto add = [&](const char* name, double err, double tol) { out.push_back({name, n, "cfg", err, tol}); };
  const StrategyMix mix = mix_from(cfg);
  const QueueReport q = analyze_queue(table, mix, n);
  const TransitionKernel k = transition_kernel(table, mix, n);

  add("drift_identity", std::fabs(k.drift() - (q.lambda1 - q.mu_r)), 1e-9);

  if (q.stable) {
    const auto pi = stationary_numeric(k);
    double mean = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) mean += static_cast<double>(i) * pi[i];
    add("p_empty_vs_numeric", std::fabs(q.p_empty - pi[0]), 1e-6);
    add("q_bar_vs_numeric", q.q_bar > 0 ? std::fabs(q.q_bar - mean) / q.q_bar : std::fabs(mean), 1e-6);

    const ThroughputComponents c = throughput_components(table, mix, n, 1.0 - q.p_empty);
    add("flow_conservation", std::fabs(n * q.q_tx * c.relay_flow(mix) - q.lambda_r), 1e-9);

    StrategyMix uniform = mix;
    uniform.d_a_br.reset();
    const DelayResult d = packet_delay(c, uniform, q);
    if (d.finite) {
      add("delay_recursion", std::fabs(d.d - d.d_recursion) / std::max(1.0, d.d), 1e-9);
      const double d3 = packet_delay_variable_alignment(c, uniform, q, uniform.d_a, uniform.d_a);
      add("delay_variable_alignment", std::fabs(d3 - d.d) / std::max(1.0, d.d), 1e-12);
    }
  }
  return out;
}

std::vector<ValidationCheck> run_validation(const SceneConfig& cfg, const SuccessTable& table) {
  std::vector<ValidationCheck> out;
  const StrategyMix base = mix_from(cfg);
  StrategyMix mixed = base;
  mixed.q_u = 0.4;
  mixed.q_uf = 0.6;
  mixed.q_ur = 0.5;
  mixed.q_r = 0.7;
  for (int n = 1; n <= std::min(3, table.n_ues()); ++n) {
    for (auto& c : oracle_checks(table, base, n, "cfg")) out.push_back(std::move(c));
    for (auto& c : oracle_checks(table, mixed, n, "mixed")) out.push_back(std::move(c));
  }
  if (table.n_ues() >= cfg.n_ues) {
    for (auto& c : model_checks(cfg, table)) out.push_back(std::move(c));
  }
  return out;
}

bool print_validation(const std::vector<ValidationCheck>& checks, std::ostream& out) {
  bool ok = true;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %3s %-6s %12s %9s  %s\n", "check", "N", "mix", "error", "tol", "result");
  out << line;
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-26s %3d %-6s %12.3e %9.1e  %s\n", c.name.c_str(), c.n, c.variant.c_str(),
                  c.error, c.tolerance, c.pass() ? "PASS" : "FAIL");
    out << line;
    ok = ok && c.pass();
  }
  out << (ok ? "all checks passed\n" : "validation FAILED\n");
  return ok;
}

}  // namespace mmrelay
