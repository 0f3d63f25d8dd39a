#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpbandit/bernoulli_kl.hpp"
#include "dpbandit/env.hpp"
#include "dpbandit/privacy.hpp"
#include "dpbandit/rng.hpp"
#include "dpbandit/trace.hpp"

namespace dpbandit {

enum class PolicyKind { kAdaPUCB, kAdaPKLUCB, kUCB, kKLUCB, kDPUCB, kDPSE };

inline bool is_private(PolicyKind kind) {
  return kind == PolicyKind::kAdaPUCB || kind == PolicyKind::kAdaPKLUCB ||
         kind == PolicyKind::kDPUCB || kind == PolicyKind::kDPSE;
}

inline const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kAdaPUCB: return "adap-ucb";
    case PolicyKind::kAdaPKLUCB: return "adap-klucb";
    case PolicyKind::kUCB: return "ucb";
    case PolicyKind::kKLUCB: return "klucb";
    case PolicyKind::kDPUCB: return "dp-ucb";
    case PolicyKind::kDPSE: return "dp-se";
  }
  return "unknown";
}

inline std::optional<PolicyKind> parse_policy(std::string_view name) {
  if (name == "adap-ucb") return PolicyKind::kAdaPUCB;
  if (name == "adap-klucb") return PolicyKind::kAdaPKLUCB;
  if (name == "ucb") return PolicyKind::kUCB;
  if (name == "klucb") return PolicyKind::kKLUCB;
  if (name == "dp-ucb") return PolicyKind::kDPUCB;
  if (name == "dp-se") return PolicyKind::kDPSE;
  return std::nullopt;
}

struct PolicySpec {
  PolicyKind kind = PolicyKind::kAdaPUCB;
  double eps = 1.0;          // privacy budget; ignored by non-private kinds
  double alpha = 3.1;        // confidence exponent
  double dpucb_gamma = 0.1;  // DP-UCB noise-envelope failure knob
  double dpse_beta = 0.0;    // DP-SE confidence; 0 selects 1/T at run time

  // Throws on invalid parameters. Returns warnings: alpha in (0,3] is
  // accepted for experimentation but voids the adaptive-episode regret
  // guarantees, which need alpha > 3.
  std::vector<std::string> validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (is_private(kind) && !(eps > 0.0))
      throw std::invalid_argument("private policies need eps > 0");
    if (kind == PolicyKind::kDPUCB && !(dpucb_gamma > 0.0))
      throw std::invalid_argument("dpucb_gamma must be positive");
    if (kind == PolicyKind::kDPSE && dpse_beta < 0.0)
      throw std::invalid_argument("dpse_beta must be nonnegative");
    std::vector<std::string> warnings;
    if ((kind == PolicyKind::kAdaPUCB || kind == PolicyKind::kAdaPKLUCB) &&
        alpha <= 3.0)
      warnings.push_back(
          "alpha <= 3: regret guarantees of the adaptive-episode policies do "
          "not apply");
    return warnings;
  }
};

// Deterministic argmax: smallest index attaining the maximum.
inline std::size_t select_argmax(std::span<const double> values) {
  if (values.empty())
    throw std::invalid_argument("argmax over an empty index list");
  std::size_t best = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) throw std::domain_error("NaN index value");
    if (values[i] > values[best]) best = i;
  }
  return best;
}

//===----------------------------------------------------------------------===//
// Optimistic indexes
//===----------------------------------------------------------------------===//

// Hoeffding-plus-Laplace index from a private mean built on s samples:
//   mu~ + sqrt(alpha log(t) / (2s)) + alpha log(t) / (eps s).
// The first bonus covers sampling noise, the second the Laplace noise.
inline double adap_ucb_index(double private_mean, std::uint64_t s,
                             std::uint64_t t_ell, double alpha, double eps) {
  if (s == 0) throw std::domain_error("index needs at least one sample");
  if (t_ell < 2) throw std::domain_error("index undefined before step 2");
  const double lt = std::log(static_cast<double>(t_ell));
  const double n = static_cast<double>(s);
  return private_mean + std::sqrt(alpha * lt / (2.0 * n)) +
         alpha * lt / (eps * n);
}

// KL variant: shift the private mean by the privacy bonus, clip to [0,1],
// then invert the Bernoulli divergence at budget alpha log(t)/s. The result
// lies in [clipped mean, 1].
inline double adap_klucb_index(double private_mean, std::uint64_t s,
                               std::uint64_t t_ell, double alpha, double eps) {
  if (s == 0) throw std::domain_error("index needs at least one sample");
  if (t_ell < 2) throw std::domain_error("index undefined before step 2");
  const double lt = std::log(static_cast<double>(t_ell));
  const double n = static_cast<double>(s);
  const double budget = alpha * lt / n;
  const double shifted = private_mean + alpha * lt / (eps * n);
  return kl_upper_inverse(std::clamp(shifted, 0.0, 1.0), budget);
}

// High-probability envelope for the tree-mechanism noise on a prefix sum of
// `pulls` rewards: at most bit_width(pulls) active Laplace nodes of scale
// ceil(log2 T)/eps, and the sub-exponential tail of their sum gives
//   |noise| <= scale * sqrt(8 m) * log(4 t^2 / gamma)
// with probability at least 1 - gamma/(2 t^2). At t = T this envelope grows
// as log(T)^{2.5}/eps.
inline double dpucb_sum_noise_bound(std::uint64_t t, std::uint64_t pulls,
                                    std::uint64_t horizon, double eps,
                                    double gamma) {
  if (pulls == 0) throw std::domain_error("noise bound needs pulls >= 1");
  if (std::isinf(eps)) return 0.0;
  const double scale = static_cast<double>(std::bit_width(horizon - 1)) / eps;
  const double terms = static_cast<double>(std::bit_width(pulls));
  const double td = static_cast<double>(t);
  return scale * std::sqrt(8.0 * terms) * std::log(4.0 * td * td / gamma);
}

//===----------------------------------------------------------------------===//
// Run cores. RewardFn: double(arm, t). StepFn: void(t, arm, reward).
// Steps are 1-based. Every core plays each arm at least once and requires
// horizon >= num_arms.
//===----------------------------------------------------------------------===//

namespace detail {
inline void check_run_args(std::size_t num_arms, std::uint64_t horizon) {
  if (num_arms < 2)
    throw std::invalid_argument("need at least two arms");
  if (horizon < num_arms)
    throw std::invalid_argument("horizon shorter than one pull per arm");
}
}  // namespace detail

// Adaptive episodes with per-arm doubling and forgetting. A chosen arm is
// played until its total pull count doubles; at the episode's end the window
// mean is released once through the Laplace mechanism and frozen. Indexes are
// computed only from each arm's last finished window, so every reward feeds
// exactly one private mean and the number of private means over a horizon T
// is at most K (ceil(log2 T) + 1). Returns the finished windows.
template <class RewardFn, class StepFn>
std::vector<WindowRecord> run_adaptive_episodes(const PolicySpec& spec,
                                                std::size_t num_arms,
                                                std::uint64_t horizon,
                                                SeededRng& rng,
                                                RewardFn&& reward_at,
                                                StepFn&& on_step) {
  detail::check_run_args(num_arms, horizon);
  const bool kl = spec.kind == PolicyKind::kAdaPKLUCB;

  struct ArmState {
    std::uint64_t pulls = 0;
    double window_sum = 0.0;
    std::uint64_t window_count = 0;
    std::uint64_t window_start = 0;
    double private_mean = 0.0;   // frozen when the window closes
    std::uint64_t last_count = 0;  // samples behind private_mean
  };
  std::vector<ArmState> arms(num_arms);
  std::vector<WindowRecord> windows;

  const auto close_window = [&](std::uint32_t a, std::uint64_t end_step) {
    ArmState& st = arms[a];
    st.private_mean = private_mean_from_sum(st.window_sum, st.window_count,
                                            spec.eps,
                                            rng.stream(Stream::kMechanism, a));
    st.last_count = st.window_count;
    windows.push_back({a, st.window_start, end_step, st.window_count});
    st.window_sum = 0.0;
    st.window_count = 0;
  };

  std::uint64_t t = 0;
  for (std::uint32_t a = 0; a < num_arms; ++a) {
    ++t;
    const double r = reward_at(a, t);
    on_step(t, a, r);
    ArmState& st = arms[a];
    st.pulls = 1;
    st.window_sum = r;
    st.window_count = 1;
    st.window_start = t;
    close_window(a, t);  // the initialization pull is the arm's first episode
  }

  std::vector<double> index(num_arms);
  while (t < horizon) {
    const std::uint64_t t_ell = t + 1;
    for (std::uint32_t a = 0; a < num_arms; ++a) {
      const ArmState& st = arms[a];
      index[a] = kl ? adap_klucb_index(st.private_mean, st.last_count, t_ell,
                                       spec.alpha, spec.eps)
                    : adap_ucb_index(st.private_mean, st.last_count, t_ell,
                                     spec.alpha, spec.eps);
    }
    const auto chosen = static_cast<std::uint32_t>(select_argmax(index));
    ArmState& st = arms[chosen];
    const std::uint64_t target = 2 * st.pulls;  // play until the count doubles
    st.window_start = t + 1;
    while (t < horizon && st.pulls < target) {
      ++t;
      const double r = reward_at(chosen, t);
      on_step(t, chosen, r);
      ++st.pulls;
      st.window_sum += r;
      ++st.window_count;
    }
    // A horizon-truncated episode computes no private mean; no decision
    // follows it.
    if (st.pulls == target) close_window(chosen, t);
  }
  return windows;
}

// Classical every-step index policies over the full reward history (UCB and
// KL-UCB with the same alpha convention as the private indexes, no noise).
template <class RewardFn, class StepFn>
void run_full_history(const PolicySpec& spec, std::size_t num_arms,
                      std::uint64_t horizon, RewardFn&& reward_at,
                      StepFn&& on_step) {
  detail::check_run_args(num_arms, horizon);
  const bool kl = spec.kind == PolicyKind::kKLUCB;
  std::vector<double> sums(num_arms, 0.0);
  std::vector<std::uint64_t> pulls(num_arms, 0);
  std::uint64_t t = 0;

  const auto pull = [&](std::uint32_t a) {
    ++t;
    const double r = reward_at(a, t);
    on_step(t, a, r);
    sums[a] += r;
    ++pulls[a];
  };

  for (std::uint32_t a = 0; a < num_arms; ++a) pull(a);
  std::vector<double> index(num_arms);
  while (t < horizon) {
    const double lt = std::log(static_cast<double>(t + 1));
    for (std::uint32_t a = 0; a < num_arms; ++a) {
      const double n = static_cast<double>(pulls[a]);
      const double mean = sums[a] / n;
      index[a] = kl ? kl_upper_inverse(mean, spec.alpha * lt / n)
                    : mean + std::sqrt(spec.alpha * lt / (2.0 * n));
    }
    pull(static_cast<std::uint32_t>(select_argmax(index)));
  }
}

// DP-UCB baseline: one tree mechanism per arm with per-arm budget eps; the
// index is the noisy mean plus the usual exploration bonus plus the noise
// envelope of the tree output. In the eps -> inf limit the trajectory
// coincides with UCB under the same seed.
template <class RewardFn, class StepFn>
void run_dpucb(const PolicySpec& spec, std::size_t num_arms,
               std::uint64_t horizon, SeededRng& rng, RewardFn&& reward_at,
               StepFn&& on_step) {
  detail::check_run_args(num_arms, horizon);
  std::vector<TreeMechanism> trees;
  trees.reserve(num_arms);
  for (std::size_t a = 0; a < num_arms; ++a)
    trees.emplace_back(horizon, spec.eps);
  std::vector<double> noisy_sum(num_arms, 0.0);
  std::vector<std::uint64_t> pulls(num_arms, 0);
  std::uint64_t t = 0;

  const auto pull = [&](std::uint32_t a) {
    ++t;
    const double r = reward_at(a, t);
    on_step(t, a, r);
    noisy_sum[a] = trees[a].add_and_query(r, rng.stream(Stream::kTree, a));
    ++pulls[a];
  };

  for (std::uint32_t a = 0; a < num_arms; ++a) pull(a);
  std::vector<double> index(num_arms);
  while (t < horizon) {
    const double lt = std::log(static_cast<double>(t + 1));
    for (std::uint32_t a = 0; a < num_arms; ++a) {
      const double n = static_cast<double>(pulls[a]);
      index[a] = noisy_sum[a] / n + std::sqrt(spec.alpha * lt / (2.0 * n)) +
                 dpucb_sum_noise_bound(t + 1, pulls[a], horizon, spec.eps,
                                       spec.dpucb_gamma) /
                     n;
    }
    pull(static_cast<std::uint32_t>(select_argmax(index)));
  }
}

// DP-SE baseline: successive elimination in doubling epochs. Epoch m pulls
// every surviving arm 2^m times, releases one fresh private epoch mean per
// arm (forgetting everything older), and eliminates any arm whose private
// upper bound falls below the best private lower bound at confidence beta.
// Needs the horizon in advance: when the next epoch does not fit, the policy
// commits to the best surviving private mean. Returns the epoch windows.
template <class RewardFn, class StepFn>
std::vector<WindowRecord> run_dpse(const PolicySpec& spec,
                                   std::size_t num_arms, std::uint64_t horizon,
                                   SeededRng& rng, RewardFn&& reward_at,
                                   StepFn&& on_step) {
  detail::check_run_args(num_arms, horizon);
  const double beta =
      spec.dpse_beta > 0.0 ? spec.dpse_beta
                           : 1.0 / static_cast<double>(horizon);
  std::vector<WindowRecord> windows;
  std::vector<std::uint32_t> alive(num_arms);
  for (std::uint32_t a = 0; a < num_arms; ++a) alive[a] = a;
  std::vector<double> private_mean(num_arms, 0.0);
  bool have_means = false;
  std::uint64_t t = 0;

  const auto pull = [&](std::uint32_t a) {
    ++t;
    on_step(t, a, reward_at(a, t));
  };
  const auto commit_best = [&]() {
    std::uint32_t best = alive[0];
    for (std::uint32_t a : alive)
      if (private_mean[a] > private_mean[best]) best = a;
    while (t < horizon) pull(best);
  };

  for (std::uint64_t epoch = 1; t < horizon; ++epoch) {
    if (alive.size() == 1) {
      commit_best();
      break;
    }
    const std::uint64_t n_m = epoch < 63 ? (1ULL << epoch) : horizon;
    if (alive.size() * n_m > horizon - t) {
      if (have_means) {
        commit_best();
      } else {
        // Not even one full epoch fits; spread the leftover uniformly.
        std::size_t i = 0;
        while (t < horizon) pull(alive[i++ % alive.size()]);
      }
      break;
    }

    for (std::uint32_t a : alive) {
      double sum = 0.0;
      const std::uint64_t start = t + 1;
      for (std::uint64_t i = 0; i < n_m; ++i) {
        ++t;
        const double r = reward_at(a, t);
        on_step(t, a, r);
        sum += r;
      }
      private_mean[a] = private_mean_from_sum(
          sum, n_m, spec.eps, rng.stream(Stream::kMechanism, a));
      windows.push_back({a, start, t, n_m});
    }
    have_means = true;

    // Elimination widths mirror the source algorithm's conservative
    // constants: a doubled Hoeffding radius keeps the Laplace share of the
    // width small, which is what makes the eliminations (and hence the
    // regret) insensitive to the budget at moderate eps.
    const double log_term = std::log(
        8.0 * static_cast<double>(num_arms) *
        static_cast<double>(epoch * epoch) / beta);
    const double nd = static_cast<double>(n_m);
    double width = std::sqrt(2.0 * log_term / nd);
    if (!std::isinf(spec.eps)) width += log_term / (nd * spec.eps);

    double best_lower = -std::numeric_limits<double>::infinity();
    for (std::uint32_t a : alive)
      best_lower = std::max(best_lower, private_mean[a] - width);
    std::vector<std::uint32_t> kept;
    for (std::uint32_t a : alive)
      if (private_mean[a] + width >= best_lower) kept.push_back(a);
    alive = std::move(kept);
  }
  return windows;
}

// Dispatches to the matching run core. Returns the private-mean windows
// (empty for policies that release no window means).
template <class RewardFn, class StepFn>
std::vector<WindowRecord> dispatch_policy(const PolicySpec& spec,
                                          std::size_t num_arms,
                                          std::uint64_t horizon,
                                          SeededRng& rng, RewardFn&& reward_at,
                                          StepFn&& on_step) {
  switch (spec.kind) {
    case PolicyKind::kAdaPUCB:
    case PolicyKind::kAdaPKLUCB:
      return run_adaptive_episodes(spec, num_arms, horizon, rng, reward_at,
                                   on_step);
    case PolicyKind::kUCB:
    case PolicyKind::kKLUCB:
      run_full_history(spec, num_arms, horizon, reward_at, on_step);
      return {};
    case PolicyKind::kDPUCB:
      run_dpucb(spec, num_arms, horizon, rng, reward_at, on_step);
      return {};
    case PolicyKind::kDPSE:
      return run_dpse(spec, num_arms, horizon, rng, reward_at, on_step);
  }
  throw std::logic_error("unknown policy kind");
}

//===----------------------------------------------------------------------===//
// Wrappers
//===----------------------------------------------------------------------===//

// One seeded run against a stochastic environment, sampled at `checkpoints`
// (sorted, unique, last element == horizon for a full trace).
inline RunTrace run_policy(const PolicySpec& spec, const Environment& env,
                           std::uint64_t horizon, std::uint64_t seed,
                           std::uint32_t run_id,
                           std::span<const std::uint64_t> checkpoints) {
  spec.validate();
  SeededRng rng(seed, run_id);

  RunTrace trace;
  trace.policy = policy_name(spec.kind);
  trace.epsilon = spec.eps;
  trace.alpha = spec.alpha;
  trace.seed = seed;
  trace.run_id = run_id;
  trace.horizon = horizon;
  trace.means = env.means();
  trace.pulls.assign(env.num_arms(), 0);

  double pseudo = 0.0;
  double reward_sum = 0.0;
  std::size_t next_cp = 0;
  const auto on_step = [&](std::uint64_t t, std::uint32_t a, double r) {
    pseudo += env.gap(a);
    reward_sum += r;
    ++trace.pulls[a];
    if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
      trace.checkpoint_t.push_back(t);
      trace.checkpoint_arm.push_back(a);
      trace.pseudo_regret.push_back(pseudo);
      trace.reward_regret.push_back(env.mu_star() * static_cast<double>(t) -
                                    reward_sum);
      ++next_cp;
    }
  };
  const auto reward_at = [&](std::uint32_t a, std::uint64_t) {
    return env.arm(a).sample(rng.stream(Stream::kReward, a));
  };

  trace.windows = dispatch_policy(spec, env.num_arms(), horizon, rng,
                                  reward_at, on_step);
  trace.private_mean_count = trace.windows.size();
  trace.final_pseudo_regret = pseudo;
  return trace;
}

// One run against a fixed time-indexed reward table (the t-th step yields
// table[t-1] whatever arm is pulled). Returns the full action sequence; this
// is the conditional-on-rewards view the audit estimates.
inline std::vector<std::uint8_t> run_policy_actions(
    const PolicySpec& spec, std::size_t num_arms, std::uint64_t horizon,
    std::span<const int> table, std::uint64_t seed, std::uint64_t trial_id) {
  if (table.size() != horizon)
    throw std::invalid_argument("reward table must have one entry per step");
  SeededRng rng(seed, trial_id);
  std::vector<std::uint8_t> actions;
  actions.reserve(horizon);
  const auto on_step = [&](std::uint64_t, std::uint32_t a, double) {
    actions.push_back(static_cast<std::uint8_t>(a));
  };
  const auto reward_at = [&](std::uint32_t, std::uint64_t t) {
    return static_cast<double>(table[t - 1]);
  };
  dispatch_policy(spec, num_arms, horizon, rng, reward_at, on_step);
  return actions;
}

}  // namespace dpbandit
