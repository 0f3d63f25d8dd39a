#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpbandit {

// One private-mean computation: the contiguous step window that fed it.
// Steps are 1-based and the range is inclusive on both ends.
struct WindowRecord {
  std::uint32_t arm = 0;
  std::uint64_t start_step = 0;
  std::uint64_t end_step = 0;
  std::uint64_t count = 0;
};

// Checkpoint grid: every step while small, then geometric with ratio 1.1,
// always containing K, 2K and T, capped at `cap` points. The ratio is widened
// if a horizon is so large that 1.1 would overflow the cap.
inline std::vector<std::uint64_t> make_checkpoints(std::uint64_t num_arms,
                                                   std::uint64_t horizon,
                                                   std::size_t cap = 200) {
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (cap < 8) throw std::invalid_argument("checkpoint cap too small");
  std::vector<std::uint64_t> pts;
  double ratio = 1.1;
  for (;;) {
    pts.clear();
    double c = 1.0;
    std::uint64_t last = 0;
    bool reached_end = false;
    while (pts.size() + 3 <= cap) {
      const auto t = std::max<std::uint64_t>(
          last + 1, static_cast<std::uint64_t>(std::ceil(c)));
      if (t >= horizon) {
        reached_end = true;
        break;
      }
      pts.push_back(t);
      last = t;
      c = std::max(c * ratio, static_cast<double>(t));
    }
    if (reached_end) break;
    ratio *= 1.5;
  }
  if (num_arms >= 1 && num_arms <= horizon) pts.push_back(num_arms);
  if (2 * num_arms <= horizon) pts.push_back(2 * num_arms);
  pts.push_back(horizon);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// The recorded history of one seeded run, sampled at the checkpoint grid.
// Pseudo-regret accumulates the gap of the arm played at each step; reward
// regret is t*mu_star minus the realized reward sum.
struct RunTrace {
  std::string policy;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t run_id = 0;
  std::uint64_t horizon = 0;
  std::vector<double> means;

  std::vector<std::uint64_t> checkpoint_t;
  std::vector<std::uint32_t> checkpoint_arm;  // arm played at that step
  std::vector<double> pseudo_regret;
  std::vector<double> reward_regret;

  std::vector<std::uint64_t> pulls;     // N_a(T)
  std::vector<WindowRecord> windows;    // one record per private window mean
  std::uint64_t private_mean_count = 0;
  double final_pseudo_regret = 0.0;
};

// Mean and sample standard deviation (n-1 denominator) of pseudo-regret
// across runs, per checkpoint.
struct AggregateSeries {
  std::vector<std::uint64_t> t;
  std::vector<double> mean_regret;
  std::vector<double> std_regret;
  std::uint32_t runs = 0;
};

inline AggregateSeries aggregate(std::span<const RunTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("no traces to aggregate");
  const std::size_t n_cp = traces[0].checkpoint_t.size();
  for (const auto& tr : traces)
    if (tr.checkpoint_t != traces[0].checkpoint_t)
      throw std::invalid_argument("traces use different checkpoint grids");

  AggregateSeries agg;
  agg.t = traces[0].checkpoint_t;
  agg.runs = static_cast<std::uint32_t>(traces.size());
  agg.mean_regret.resize(n_cp);
  agg.std_regret.resize(n_cp);
  const double n = static_cast<double>(traces.size());
  for (std::size_t i = 0; i < n_cp; ++i) {
    double sum = 0.0;
    for (const auto& tr : traces) sum += tr.pseudo_regret[i];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& tr : traces) {
      const double d = tr.pseudo_regret[i] - mean;
      ss += d * d;
    }
    agg.mean_regret[i] = mean;
    agg.std_regret[i] = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  }
  return agg;
}

}  // namespace dpbandit
