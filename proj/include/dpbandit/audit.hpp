#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpbandit/policies.hpp"
#include "dpbandit/util.hpp"

namespace dpbandit {

// A Monte-Carlo check of the multiplicative-stability property of a policy's
// action-sequence distribution: two fixed reward tables differing in exactly
// one entry drive the same policy, and the estimated sequence frequencies are
// compared. The audit can falsify the property but never certify it; a pass
// is necessary, not sufficient.
struct AuditScenario {
  PolicySpec policy;
  std::size_t num_arms = 2;
  std::uint64_t horizon = 4;
  std::vector<int> rewards;           // time-indexed table, entries in {0,1}
  std::vector<int> neighbor_rewards;  // differs from `rewards` in one entry
  std::uint64_t trials = 200000;
  std::uint64_t seed = 0;
};

constexpr std::uint64_t kAuditMaxSupport = 4096;
constexpr std::uint64_t kAuditMinTrials = 100000;

inline void validate_scenario(const AuditScenario& sc) {
  if (sc.num_arms < 2 || sc.horizon < 1)
    throw std::invalid_argument("audit needs K >= 2 and T >= 1");
  std::uint64_t support = 1;
  for (std::uint64_t t = 0; t < sc.horizon; ++t) {
    support *= sc.num_arms;
    if (support > kAuditMaxSupport)
      throw std::invalid_argument(
          "action-sequence support exceeds the enumerable limit (K^T > 4096)");
  }
  if (sc.trials < kAuditMinTrials)
    throw std::invalid_argument("audit needs at least 100000 trials");
  if (sc.rewards.size() != sc.horizon ||
      sc.neighbor_rewards.size() != sc.horizon)
    throw std::invalid_argument("reward tables must have one entry per step");
  std::size_t differing = 0;
  for (std::uint64_t t = 0; t < sc.horizon; ++t) {
    if ((sc.rewards[t] != 0 && sc.rewards[t] != 1) ||
        (sc.neighbor_rewards[t] != 0 && sc.neighbor_rewards[t] != 1))
      throw std::invalid_argument("table rewards must be 0 or 1");
    if (sc.rewards[t] != sc.neighbor_rewards[t]) ++differing;
  }
  if (differing != 1)
    throw std::invalid_argument(
        "neighboring tables must differ in exactly one entry");
}

inline std::uint32_t encode_actions(std::span<const std::uint8_t> actions,
                                    std::size_t num_arms) {
  std::uint32_t key = 0;
  for (std::uint8_t a : actions)
    key = key * static_cast<std::uint32_t>(num_arms) + a;
  return key;
}

inline std::string decode_actions(std::uint32_t key, std::size_t num_arms,
                                  std::uint64_t horizon) {
  std::string out(horizon, '0');
  for (std::uint64_t i = 0; i < horizon; ++i) {
    out[horizon - 1 - i] =
        static_cast<char>('0' + key % static_cast<std::uint32_t>(num_arms));
    key /= static_cast<std::uint32_t>(num_arms);
  }
  return out;
}

// Sequence key -> trial count. Ordered so reports iterate deterministically.
using ActionDistribution = std::map<std::uint32_t, std::uint64_t>;

// Runs `runner(trial)` (returning one action sequence) `trials` times in
// parallel and merges the counts. Counts always sum to `trials`.
template <class TrialRunner>
ActionDistribution estimate_distribution_with(std::uint64_t trials,
                                              std::size_t num_arms,
                                              const TrialRunner& runner) {
  ActionDistribution merged;
  std::mutex merge_mutex;
  const unsigned workers = default_worker_count();
  const std::uint64_t chunk = (trials + workers - 1) / workers;
  parallel_for(workers, [&](std::size_t w) {
    const std::uint64_t begin = w * chunk;
    const std::uint64_t end = std::min(trials, begin + chunk);
    ActionDistribution local;
    for (std::uint64_t trial = begin; trial < end; ++trial)
      ++local[encode_actions(runner(trial), num_arms)];
    std::lock_guard<std::mutex> lock(merge_mutex);
    for (const auto& [key, count] : local) merged[key] += count;
  });
  return merged;
}

inline ActionDistribution estimate_action_distribution(
    const AuditScenario& sc, bool neighbor) {
  validate_scenario(sc);
  sc.policy.validate();
  const std::vector<int>& table = neighbor ? sc.neighbor_rewards : sc.rewards;
  return estimate_distribution_with(
      sc.trials, sc.num_arms, [&](std::uint64_t trial) {
        return run_policy_actions(sc.policy, sc.num_arms, sc.horizon, table,
                                  sc.seed, trial);
      });
}

enum class Verdict { kPass, kFail, kInconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

struct AuditRow {
  std::uint32_t key = 0;
  std::uint64_t count_orig = 0;
  std::uint64_t count_neigh = 0;
  double log_ratio = 0.0;
  double slack = 0.0;
  bool pass = true;
};

struct AuditReport {
  double epsilon = 0.0;
  std::uint64_t min_count = 0;
  std::vector<AuditRow> rows;  // sequences reaching min_count on either side
  double max_abs_log_ratio = 0.0;
  Verdict verdict = Verdict::kInconclusive;
};

// Two-sided ratio test. Sequences frequent in both estimates use the raw
// count ratio with the delta-method standard error of a log-ratio of binomial
// proportions; a sequence frequent on one side only is tested with 1/2-
// smoothed counts, since a hard zero against a large count is itself evidence
// of a ratio violation. A sequence passes iff |log ratio| <= eps + 3 SE.
inline AuditReport audit_ratio(const ActionDistribution& orig,
                               const ActionDistribution& neigh, double eps,
                               std::uint64_t min_count = 500) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (min_count == 0) throw std::invalid_argument("min_count must be >= 1");

  AuditReport report;
  report.epsilon = eps;
  report.min_count = min_count;

  ActionDistribution keys = orig;
  for (const auto& [key, count] : neigh) keys.emplace(key, 0);

  for (const auto& [key, unused] : keys) {
    const auto it_o = orig.find(key);
    const auto it_n = neigh.find(key);
    const std::uint64_t c_o = it_o == orig.end() ? 0 : it_o->second;
    const std::uint64_t c_n = it_n == neigh.end() ? 0 : it_n->second;
    if (c_o < min_count && c_n < min_count) continue;

    AuditRow row;
    row.key = key;
    row.count_orig = c_o;
    row.count_neigh = c_n;
    if (c_o >= min_count && c_n >= min_count) {
      row.log_ratio = std::log(static_cast<double>(c_o) /
                               static_cast<double>(c_n));
      row.slack = 3.0 * std::sqrt(1.0 / static_cast<double>(c_o) +
                                  1.0 / static_cast<double>(c_n));
    } else {
      const double so = static_cast<double>(c_o) + 0.5;
      const double sn = static_cast<double>(c_n) + 0.5;
      row.log_ratio = std::log(so / sn);
      row.slack = 3.0 * std::sqrt(1.0 / so + 1.0 / sn);
    }
    row.pass = std::abs(row.log_ratio) <= eps + row.slack;
    report.max_abs_log_ratio =
        std::max(report.max_abs_log_ratio, std::abs(row.log_ratio));
    report.rows.push_back(row);
  }

  if (report.rows.empty()) {
    report.verdict = Verdict::kInconclusive;
  } else {
    report.verdict = Verdict::kPass;
    for (const auto& row : report.rows)
      if (!row.pass) report.verdict = Verdict::kFail;
  }
  return report;
}

// Convenience wrapper: estimate both distributions and test them.
inline AuditReport run_audit(const AuditScenario& sc,
                             std::uint64_t min_count = 500) {
  const ActionDistribution orig = estimate_action_distribution(sc, false);
  const ActionDistribution neigh = estimate_action_distribution(sc, true);
  return audit_ratio(orig, neigh, sc.policy.eps, min_count);
}

}  // namespace dpbandit
