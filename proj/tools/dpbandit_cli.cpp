// Command-line front end: `run` executes seeded policy sweeps and emits
// regret CSVs, `bounds` evaluates the closed-form regret bounds for an
// instance, `audit` estimates the action-sequence ratio test between two
// neighboring reward tables.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpbandit/harness.hpp"

namespace {

using namespace dpbandit;

std::string raw_path_for(const std::string& out) {
  const std::size_t dot = out.rfind('.');
  if (dot == std::string::npos || out.find('/', dot) != std::string::npos)
    return out + "_raw";
  return out.substr(0, dot) + "_raw" + out.substr(dot);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
}

PolicyKind policy_from_flag(const std::string& name) {
  const auto kind = parse_policy(name);
  if (!kind)
    throw CLI::ValidationError(
        "--policy",
        "unknown policy '" + name +
            "' (expected adap-ucb|adap-klucb|ucb|klucb|dp-ucb|dp-se)");
  return *kind;
}

int cmd_run(const std::string& policy_flag, const std::string& means_flag,
            const std::string& epsilon_flag, double alpha,
            std::uint64_t horizon, std::uint32_t runs, std::uint64_t seed,
            double dpucb_gamma, double dpse_beta, const std::string& out) {
  BatchConfig cfg;
  cfg.policy.kind = policy_from_flag(policy_flag);
  cfg.policy.alpha = alpha;
  cfg.policy.dpucb_gamma = dpucb_gamma;
  cfg.policy.dpse_beta = dpse_beta;
  cfg.means = parse_double_list(means_flag);
  cfg.epsilons = parse_double_list(epsilon_flag);
  cfg.horizon = horizon;
  cfg.runs = runs;
  cfg.seed = seed;

  for (double eps : cfg.epsilons) {
    PolicySpec spec = cfg.policy;
    spec.eps = eps;
    for (const std::string& warning : spec.validate())
      std::cerr << "warning: " << warning << '\n';
  }

  const std::vector<CellResult> cells = run_batch(cfg);

  std::ostringstream raw;
  write_raw_csv(raw, cells);
  std::ostringstream agg;
  write_aggregate_csv(agg, policy_name(cfg.policy.kind), alpha, cells);

  if (out.empty()) {
    std::cout << raw.str();
  } else {
    write_file(out, agg.str());
    write_file(raw_path_for(out), raw.str());
    std::cerr << "wrote " << out << " and " << raw_path_for(out) << '\n';
  }
  return 0;
}

int cmd_bounds(const std::string& means_flag, const std::string& epsilon_flag,
               double alpha, std::uint64_t horizon, const std::string& out) {
  const std::vector<double> means = parse_double_list(means_flag);
  std::vector<BoundReport> reports;
  for (double eps : parse_double_list(epsilon_flag))
    reports.push_back(
        evaluate_bounds(means, static_cast<double>(horizon), eps, alpha));

  std::ostringstream os;
  write_bounds_csv(os, reports);
  if (out.empty())
    std::cout << os.str();
  else
    write_file(out, os.str());
  return 0;
}

int cmd_audit(const std::string& policy_flag, double epsilon, double alpha,
              std::uint64_t horizon, std::uint64_t trials, std::uint64_t seed,
              std::size_t arms, const std::string& table_flag,
              std::size_t flip, std::uint64_t min_count,
              const std::string& out) {
  AuditScenario sc;
  sc.policy.kind = policy_from_flag(policy_flag);
  sc.policy.eps = epsilon;
  sc.policy.alpha = alpha;
  sc.num_arms = arms;
  sc.horizon = horizon;
  sc.trials = trials;
  sc.seed = seed;

  if (table_flag.empty()) {
    sc.rewards.assign(horizon, 0);
  } else {
    for (double v : parse_double_list(table_flag))
      sc.rewards.push_back(static_cast<int>(v));
  }
  if (flip >= sc.rewards.size())
    throw std::invalid_argument("--flip index past the end of the table");
  sc.neighbor_rewards = sc.rewards;
  sc.neighbor_rewards[flip] = 1 - sc.neighbor_rewards[flip];

  for (const std::string& warning : sc.policy.validate())
    std::cerr << "warning: " << warning << '\n';

  const AuditReport report = run_audit(sc, min_count);

  std::ostringstream os;
  write_audit_csv(os, report, sc.num_arms, sc.horizon);
  if (out.empty())
    std::cout << os.str();
  else
    write_file(out, os.str());
  std::cerr << "audit verdict: " << verdict_name(report.verdict)
            << " (max |log ratio| "
            << format_double(report.max_abs_log_ratio) << ", eps "
            << format_double(epsilon) << ")\n";
  std::cerr << "note: a pass is necessary, not sufficient; the audit can "
               "falsify the privacy property but never certify it\n";
  return report.verdict == Verdict::kFail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic bandit simulator under per-reward differential "
               "privacy: seeded experiment runner, regret-bound calculators, "
               "and a Monte-Carlo privacy auditor"};
  app.require_subcommand(1);

  std::string policy;
  std::string means;
  std::string epsilon = "1";
  std::string table;
  std::string out;
  double alpha = 3.1;
  std::uint64_t horizon = 100000;
  std::uint32_t runs = 20;
  std::uint64_t seed = 42;
  double dpucb_gamma = 0.1;
  double dpse_beta = 0.0;
  std::uint64_t trials = 200000;
  std::uint64_t min_count = 500;
  std::size_t arms = 2;
  std::size_t flip = 0;

  CLI::App* run = app.add_subcommand(
      "run", "Execute seeded runs per (policy, epsilon) cell; emit raw and "
             "aggregate regret CSVs");
  run->add_option("--policy", policy,
                  "adap-ucb|adap-klucb|ucb|klucb|dp-ucb|dp-se")
      ->required();
  run->add_option("--means", means, "comma-separated Bernoulli means in [0,1]")
      ->required();
  run->add_option("--epsilon", epsilon,
                  "privacy budget, or comma-separated list (one cell per "
                  "value)");
  run->add_option("--alpha", alpha, "confidence exponent")
      ->capture_default_str();
  run->add_option("--horizon", horizon, "steps per run")->required();
  run->add_option("--runs", runs, "independent runs per cell")
      ->capture_default_str();
  run->add_option("--seed", seed, "master seed")->capture_default_str();
  run->add_option("--dpucb-gamma", dpucb_gamma,
                  "dp-ucb noise-envelope failure knob")
      ->capture_default_str();
  run->add_option("--dpse-beta", dpse_beta,
                  "dp-se elimination confidence (0 selects 1/T)");
  run->add_option("--out", out,
                  "aggregate CSV path (raw CSV lands next to it with a _raw "
                  "suffix); omit to print raw rows to stdout");

  CLI::App* bounds = app.add_subcommand(
      "bounds", "Evaluate the closed-form regret bounds for an instance");
  bounds->add_option("--means", means, "comma-separated Bernoulli means")
      ->required();
  bounds->add_option("--epsilon", epsilon, "budget or comma-separated sweep");
  bounds->add_option("--alpha", alpha, "confidence exponent")
      ->capture_default_str();
  bounds->add_option("--horizon", horizon, "horizon T")->required();
  bounds->add_option("--out", out, "CSV path; omit for stdout");

  CLI::App* audit = app.add_subcommand(
      "audit", "Monte-Carlo ratio test of the action-sequence distribution "
               "under two neighboring reward tables");
  double audit_eps = 1.0;
  audit->add_option("--policy", policy,
                    "adap-ucb|adap-klucb|ucb|klucb|dp-ucb|dp-se")
      ->required();
  audit->add_option("--epsilon", audit_eps, "privacy budget to test against")
      ->capture_default_str();
  audit->add_option("--alpha", alpha, "confidence exponent")
      ->capture_default_str();
  audit->add_option("--horizon", horizon, "steps per trial (small)")
      ->default_val(std::uint64_t{4});
  audit->add_option("--trials", trials, "Monte-Carlo trials per table")
      ->capture_default_str();
  audit->add_option("--seed", seed, "master seed")->capture_default_str();
  audit->add_option("--arms", arms, "number of arms")->capture_default_str();
  audit->add_option("--table", table,
                    "comma-separated 0/1 rewards, one per step (default all "
                    "zeros)");
  audit->add_option("--flip", flip,
                    "index of the entry toggled in the neighboring table")
      ->capture_default_str();
  audit->add_option("--min-count", min_count,
                    "minimum count for a sequence to enter the ratio test")
      ->capture_default_str();
  audit->add_option("--out", out, "CSV path; omit for stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(policy, means, epsilon, alpha, horizon, runs, seed,
                     dpucb_gamma, dpse_beta, out);
    if (bounds->parsed())
      return cmd_bounds(means, epsilon, alpha, horizon, out);
    if (audit->parsed())
      return cmd_audit(policy, audit_eps, alpha, horizon, trials, seed, arms,
                       table, flip, min_count, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
