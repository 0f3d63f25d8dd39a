#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "dpbandit/policies.hpp"

using namespace dpbandit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct StepLog {
  std::vector<std::uint32_t> arms;  // arms[t-1] = arm played at step t
  std::vector<double> rewards;
};

// Full per-step recording against a stochastic Bernoulli environment.
template <class Runner>
StepLog record_run(const Environment& env, SeededRng& rng, Runner&& runner) {
  StepLog log;
  runner(
      [&](std::uint32_t a, std::uint64_t) {
        return env.arm(a).sample(rng.stream(Stream::kReward, a));
      },
      [&](std::uint64_t, std::uint32_t a, double r) {
        log.arms.push_back(a);
        log.rewards.push_back(r);
      });
  return log;
}

std::vector<std::uint64_t> full_grid(std::uint64_t horizon) {
  std::vector<std::uint64_t> cps(horizon);
  for (std::uint64_t t = 1; t <= horizon; ++t) cps[t - 1] = t;
  return cps;
}

}  // namespace

TEST_CASE("select_argmax ties break toward the smallest index") {
  const std::vector<double> v{0.2, 0.9, 0.9};
  REQUIRE(select_argmax(v) == 1);
  const std::vector<double> single{1.0};
  REQUIRE(select_argmax(single) == 0);
  REQUIRE_THROWS_AS(select_argmax({}), std::invalid_argument);
  const std::vector<double> with_nan{0.1, std::nan("")};
  REQUIRE_THROWS_AS(select_argmax(with_nan), std::domain_error);
}

TEST_CASE("select_argmax is invariant under constant shifts") {
  SeededRng rng(8, 0);
  auto& gen = rng.stream(Stream::kReward, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(5);
    for (auto& x : v) x = gen.uniform01();
    const double shift = 10.0 * (gen.uniform01() - 0.5);
    std::vector<double> shifted = v;
    for (auto& x : shifted) x += shift;
    REQUIRE(select_argmax(v) == select_argmax(shifted));
  }
}

TEST_CASE("adaptive index values") {
  SECTION("direct evaluation at s=1, t=e, alpha=1, eps=1") {
    const auto t_e = static_cast<std::uint64_t>(std::ceil(std::exp(1.0)));
    // log(3) != 1; build the expected value from the same log the index uses.
    const double lt = std::log(static_cast<double>(t_e));
    REQUIRE(adap_ucb_index(0.0, 1, t_e, 1.0, 1.0) ==
            Catch::Approx(std::sqrt(lt / 2.0) + lt).epsilon(1e-12));
  }
  SECTION("the exact example value sqrt(1/2) + 1 at log t = 1") {
    // Evaluate the closed form the index implements with ln t = 1 by
    // comparing against a horizon whose log is scaled out.
    const double idx = adap_ucb_index(0.0, 1, 3, 1.0 / std::log(3.0), 1.0);
    REQUIRE(idx == Catch::Approx(std::sqrt(0.5) + 1.0).epsilon(1e-12));
  }
  SECTION("bonuses vanish as the sample count grows") {
    REQUIRE(adap_ucb_index(0.5, 1ULL << 50, 100, 3.1, 1.0) ==
            Catch::Approx(0.5).margin(1e-6));
  }
  SECTION("strictly decreasing in s") {
    double prev = kInf;
    for (std::uint64_t s = 1; s <= 1024; s *= 2) {
      const double idx = adap_ucb_index(0.5, s, 100, 3.1, 1.0);
      REQUIRE(idx < prev);
      prev = idx;
    }
  }
  SECTION("eps -> inf reduces to the noise-free UCB index") {
    const double idx = adap_ucb_index(0.4, 16, 1000, 3.1, kInf);
    REQUIRE(idx == Catch::Approx(0.4 + std::sqrt(3.1 * std::log(1000.0) /
                                                 32.0)).epsilon(1e-12));
  }
  SECTION("s = 0 violates the contract") {
    REQUIRE_THROWS_AS(adap_ucb_index(0.5, 0, 10, 3.1, 1.0), std::domain_error);
    REQUIRE_THROWS_AS(adap_klucb_index(0.5, 0, 10, 3.1, 1.0),
                      std::domain_error);
  }
}

TEST_CASE("kl index clips the shifted mean and stays in [clip, 1]") {
  // Huge privacy shift saturates the clipped mean at 1, so the index is 1.
  REQUIRE(adap_klucb_index(0.9, 1, 100, 3.1, 0.001) == 1.0);
  // Negative private mean clips to 0; the index stays in [0, 1].
  const double idx = adap_klucb_index(-5.0, 1000000, 4, 3.1, kInf);
  REQUIRE(idx >= 0.0);
  REQUIRE(idx <= 1.0);
}

TEST_CASE("episodic runs validate the horizon") {
  const auto env = Environment::bernoulli(std::vector<double>{0.5, 0.5});
  PolicySpec spec;
  spec.kind = PolicyKind::kAdaPUCB;
  const auto cps = full_grid(1);
  REQUIRE_THROWS_AS(run_policy(spec, env, 1, 0, 0, cps),
                    std::invalid_argument);
}

TEST_CASE("horizon K yields exactly the initialization pulls") {
  const auto env = Environment::bernoulli(std::vector<double>{0.5, 0.5});
  for (PolicyKind kind : {PolicyKind::kAdaPUCB, PolicyKind::kAdaPKLUCB,
                          PolicyKind::kUCB, PolicyKind::kKLUCB,
                          PolicyKind::kDPUCB, PolicyKind::kDPSE}) {
    PolicySpec spec;
    spec.kind = kind;
    spec.eps = 1.0;
    const auto cps = full_grid(2);
    const RunTrace tr = run_policy(spec, env, 2, 11, 0, cps);
    REQUIRE(tr.checkpoint_arm == std::vector<std::uint32_t>{0, 1});
  }
}

TEST_CASE("doubling ladder on a deterministic instance") {
  // Arm 0 always pays 1, arm 1 always pays 0; with eps = inf arm 0 wins the
  // first decision and its finished windows double: 1 (init), 1, 2, 4, 8, ...
  const Environment env({ArmModel::bernoulli(1.0), ArmModel::bernoulli(0.0)});
  PolicySpec spec;
  spec.kind = PolicyKind::kAdaPUCB;
  spec.eps = kInf;
  spec.alpha = 3.1;
  SeededRng rng(3, 0);
  std::vector<WindowRecord> windows;
  record_run(env, rng, [&](auto&& reward, auto&& step) {
    windows = run_adaptive_episodes(spec, 2, 200, rng, reward, step);
  });
  std::vector<std::uint64_t> arm0_lengths;
  for (const auto& w : windows)
    if (w.arm == 0) arm0_lengths.push_back(w.count);
  REQUIRE(arm0_lengths.size() >= 5);
  REQUIRE(arm0_lengths[0] == 1);  // initialization pull
  for (std::size_t j = 1; j < arm0_lengths.size(); ++j)
    REQUIRE(arm0_lengths[j] == (1ULL << (j - 1)));
}

TEST_CASE("windows are contiguous, disjoint, single-arm episodes") {
  const auto env = Environment::bernoulli(
      std::vector<double>{0.75, 0.625, 0.5, 0.375, 0.25});
  for (PolicyKind kind : {PolicyKind::kAdaPUCB, PolicyKind::kAdaPKLUCB}) {
    PolicySpec spec;
    spec.kind = kind;
    spec.eps = 1.0;
    const std::uint64_t horizon = 1 << 14;
    SeededRng rng(99, 0);
    StepLog log;
    std::vector<WindowRecord> windows;
    log = record_run(env, rng, [&](auto&& reward, auto&& step) {
      windows = run_adaptive_episodes(spec, env.num_arms(), horizon, rng,
                                      reward, step);
    });

    std::uint64_t covered_end = 0;
    std::map<std::uint32_t, std::vector<std::uint64_t>> lengths;
    for (const auto& w : windows) {
      REQUIRE(w.end_step - w.start_step + 1 == w.count);
      REQUIRE(w.start_step > covered_end);  // disjoint, in order
      covered_end = w.end_step;
      for (std::uint64_t t = w.start_step; t <= w.end_step; ++t)
        REQUIRE(log.arms[t - 1] == w.arm);  // one contiguous episode, one arm
      lengths[w.arm].push_back(w.count);
    }
    for (const auto& [arm, ls] : lengths) {
      REQUIRE(ls[0] == 1);
      for (std::size_t j = 1; j < ls.size(); ++j)
        REQUIRE(ls[j] == (1ULL << (j - 1)));
    }
    const auto budget =
        env.num_arms() *
        (static_cast<std::uint64_t>(std::ceil(std::log2(double(horizon)))) +
         1);
    REQUIRE(windows.size() <= budget);
  }
}

TEST_CASE("episodic regret stays under the closed-form envelope at T=1e4") {
  // Envelope for gap 1, eps = 1, alpha = 3.1:
  // 16 alpha log(T)/min{1, 1} + 3 alpha/(alpha-3).
  const Environment env({ArmModel::bernoulli(1.0), ArmModel::bernoulli(0.0)});
  PolicySpec spec;
  spec.kind = PolicyKind::kAdaPUCB;
  spec.eps = 1.0;
  spec.alpha = 3.1;
  const std::uint64_t horizon = 10000;
  const double envelope = 16.0 * spec.alpha * std::log(double(horizon)) +
                          3.0 * spec.alpha / (spec.alpha - 3.0);
  const auto cps = make_checkpoints(2, horizon);
  double total = 0.0;
  for (std::uint32_t run = 0; run < 20; ++run)
    total += run_policy(spec, env, horizon, 500 + run, run, cps)
                 .final_pseudo_regret;
  REQUIRE(total / 20.0 <= envelope);
}

TEST_CASE("runs are deterministic byte for byte") {
  const auto env = Environment::bernoulli(
      std::vector<double>{0.75, 0.625, 0.5, 0.375, 0.25});
  const auto cps = make_checkpoints(5, 20000);
  for (PolicyKind kind :
       {PolicyKind::kAdaPUCB, PolicyKind::kAdaPKLUCB, PolicyKind::kDPUCB,
        PolicyKind::kDPSE, PolicyKind::kUCB}) {
    PolicySpec spec;
    spec.kind = kind;
    spec.eps = 0.5;
    const RunTrace a = run_policy(spec, env, 20000, 42, 3, cps);
    const RunTrace b = run_policy(spec, env, 20000, 42, 3, cps);
    REQUIRE(a.checkpoint_arm == b.checkpoint_arm);
    REQUIRE(a.pseudo_regret == b.pseudo_regret);
    REQUIRE(a.reward_regret == b.reward_regret);
    REQUIRE(a.pulls == b.pulls);
  }
}

TEST_CASE("pseudo-regret is nondecreasing and consistent with pull counts") {
  const auto env = Environment::bernoulli(
      std::vector<double>{0.75, 0.625, 0.5, 0.375, 0.25});
  PolicySpec spec;
  spec.kind = PolicyKind::kAdaPKLUCB;
  spec.eps = 1.0;
  const auto cps = make_checkpoints(5, 30000);
  const RunTrace tr = run_policy(spec, env, 30000, 7, 0, cps);
  for (std::size_t i = 1; i < tr.pseudo_regret.size(); ++i)
    REQUIRE(tr.pseudo_regret[i] >= tr.pseudo_regret[i - 1]);
  double from_pulls = 0.0;
  for (std::size_t a = 0; a < env.num_arms(); ++a)
    from_pulls += env.gap(a) * double(tr.pulls[a]);
  REQUIRE(tr.final_pseudo_regret == Catch::Approx(from_pulls).epsilon(1e-9));
}

TEST_CASE("ucb resolves a unit gap within logarithmically many pulls") {
  const Environment env({ArmModel::bernoulli(1.0), ArmModel::bernoulli(0.0)});
  PolicySpec spec;
  spec.kind = PolicyKind::kUCB;
  spec.alpha = 3.1;
  const auto cps = full_grid(100);
  const RunTrace tr = run_policy(spec, env, 100, 1, 0, cps);
  REQUIRE(tr.pulls[1] <= 20);
}

TEST_CASE("dp-ucb in the zero-noise limit reproduces ucb trajectories") {
  const auto env = Environment::bernoulli(
      std::vector<double>{0.75, 0.625, 0.5, 0.375, 0.25});
  PolicySpec dp;
  dp.kind = PolicyKind::kDPUCB;
  dp.eps = kInf;
  PolicySpec ucb;
  ucb.kind = PolicyKind::kUCB;
  const auto cps = full_grid(2000);
  const RunTrace a = run_policy(dp, env, 2000, 13, 0, cps);
  const RunTrace b = run_policy(ucb, env, 2000, 13, 0, cps);
  REQUIRE(a.checkpoint_arm == b.checkpoint_arm);
}

TEST_CASE("dp-ucb index inflation has the advertised growth and 1/eps shape") {
  // The sum-level envelope at t = n = T grows like log(T)^{2.5}/eps: the
  // ratio to that profile stays within a constant band while T spans 15
  // octaves, and scaling eps rescales the bound exactly.
  const double gamma = 0.1;
  std::vector<double> ratios;
  for (std::uint64_t exp = 10; exp <= 25; exp += 5) {
    const std::uint64_t horizon = 1ULL << exp;
    const double bound =
        dpucb_sum_noise_bound(horizon, horizon, horizon, 1.0, gamma);
    ratios.push_back(bound / std::pow(std::log2(double(horizon)), 2.5));
  }
  for (double r : ratios) {
    REQUIRE(r > 0.5 * ratios.front());
    REQUIRE(r < 2.0 * ratios.front());
  }
  const double at_eps1 = dpucb_sum_noise_bound(1 << 20, 1 << 10, 1 << 20, 1.0, gamma);
  const double at_eps4 = dpucb_sum_noise_bound(1 << 20, 1 << 10, 1 << 20, 4.0, gamma);
  REQUIRE(at_eps1 == Catch::Approx(4.0 * at_eps4).epsilon(1e-12));
}

TEST_CASE("dp-se commits to the survivor and flattens its regret") {
  const Environment env({ArmModel::bernoulli(1.0), ArmModel::bernoulli(0.0)});
  PolicySpec spec;
  spec.kind = PolicyKind::kDPSE;
  spec.eps = kInf;
  spec.dpse_beta = 0.001;
  const std::uint64_t horizon = 4096;
  SeededRng rng(5, 0);
  StepLog log = record_run(env, rng, [&](auto&& reward, auto&& step) {
    run_dpse(spec, 2, horizon, rng, reward, step);
  });

  // First epoch m with width < 1/2 ends the suboptimal arm: widths are
  // sqrt(2 log(8 K m^2 / beta) / 2^m) here (no Laplace term at eps = inf).
  std::uint64_t expected_last_epoch = 0;
  for (std::uint64_t m = 1;; ++m) {
    const double log_term = std::log(8.0 * 2.0 * double(m * m) / 0.001);
    if (std::sqrt(2.0 * log_term / double(1ULL << m)) < 0.5) {
      expected_last_epoch = m;
      break;
    }
  }
  std::uint64_t arm1_pulls = 0;
  for (auto a : log.arms) arm1_pulls += a == 1;
  std::uint64_t expected_pulls = 0;  // arm 1 plays epochs 1..m in full
  for (std::uint64_t m = 1; m <= expected_last_epoch; ++m)
    expected_pulls += 1ULL << m;
  REQUIRE(arm1_pulls == expected_pulls);
  // After its last pull the trajectory is pure commitment to arm 0.
  std::uint64_t last_arm1 = 0;
  for (std::uint64_t t = 1; t <= log.arms.size(); ++t)
    if (log.arms[t - 1] == 1) last_arm1 = t;
  for (std::uint64_t t = last_arm1 + 1; t <= log.arms.size(); ++t)
    REQUIRE(log.arms[t - 1] == 0);
}

TEST_CASE("dp-se regret is insensitive to the budget") {
  // Same instance, eps 0.5 vs 1: elimination epochs are dominated by the
  // sampling width, so the mean regrets stay within a tight ratio band.
  const auto env = Environment::bernoulli(
      std::vector<double>{0.75, 0.625, 0.5, 0.375, 0.25});
  const std::uint64_t horizon = 100000;
  const auto cps = make_checkpoints(5, horizon);
  double mean_half = 0.0, mean_one = 0.0;
  for (std::uint32_t run = 0; run < 20; ++run) {
    PolicySpec spec;
    spec.kind = PolicyKind::kDPSE;
    spec.eps = 0.5;
    mean_half +=
        run_policy(spec, env, horizon, 77, run, cps).final_pseudo_regret;
    spec.eps = 1.0;
    mean_one +=
        run_policy(spec, env, horizon, 77, 100 + run, cps).final_pseudo_regret;
  }
  const double ratio = mean_half / mean_one;
  REQUIRE(ratio >= 0.8);
  REQUIRE(ratio <= 1.25);
}

TEST_CASE("policy spec validation") {
  PolicySpec spec;
  spec.kind = PolicyKind::kAdaPUCB;
  spec.eps = 0.0;
  REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.eps = 1.0;
  spec.alpha = 0.0;
  REQUIRE_THROWS_AS(spec.validate(), std::invalid_argument);
  spec.alpha = 1.0;
  REQUIRE_FALSE(spec.validate().empty());  // warning: alpha <= 3
  spec.alpha = 3.1;
  REQUIRE(spec.validate().empty());
}

TEST_CASE("private-mean budget over a long horizon") {
  const auto env = Environment::bernoulli(
      std::vector<double>{0.75, 0.625, 0.5, 0.375, 0.25});
  PolicySpec spec;
  spec.kind = PolicyKind::kAdaPUCB;
  spec.eps = 0.25;
  const std::uint64_t horizon = 100000;
  const auto cps = make_checkpoints(5, horizon);
  const RunTrace tr = run_policy(spec, env, horizon, 21, 0, cps);
  const auto budget =
      env.num_arms() *
      (static_cast<std::uint64_t>(std::ceil(std::log2(double(horizon)))) + 1);
  REQUIRE(tr.private_mean_count <= budget);
}
