#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpbandit/audit.hpp"
#include "dpbandit/bounds.hpp"
#include "dpbandit/csv.hpp"
#include "dpbandit/env.hpp"
#include "dpbandit/policies.hpp"
#include "dpbandit/trace.hpp"
#include "dpbandit/util.hpp"

namespace dpbandit {

// One experiment sweep: a single policy kind over a list of privacy budgets,
// R seeded runs per (policy, eps) cell.
struct BatchConfig {
  PolicySpec policy;             // eps field is overridden per cell
  std::vector<double> epsilons;  // one cell per entry
  std::vector<double> means;     // Bernoulli instance
  std::uint64_t horizon = 100000;
  std::uint32_t runs = 20;
  std::uint64_t seed = 42;
};

struct CellResult {
  double epsilon = 0.0;
  std::vector<RunTrace> traces;
  AggregateSeries series;
};

// Runs every (cell, run) job in parallel. Output ordering, and therefore the
// emitted CSV bytes, depend only on the configuration.
inline std::vector<CellResult> run_batch(const BatchConfig& cfg) {
  if (cfg.runs == 0) throw std::invalid_argument("need at least one run");
  if (cfg.epsilons.empty())
    throw std::invalid_argument("need at least one epsilon cell");
  const Environment env = Environment::bernoulli(cfg.means);
  if (cfg.horizon < env.num_arms())
    throw std::invalid_argument("horizon shorter than one pull per arm");
  for (double eps : cfg.epsilons) {
    PolicySpec spec = cfg.policy;
    spec.eps = eps;
    spec.validate();
  }

  const std::vector<std::uint64_t> checkpoints =
      make_checkpoints(env.num_arms(), cfg.horizon);

  std::vector<CellResult> cells(cfg.epsilons.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    cells[c].epsilon = cfg.epsilons[c];
    cells[c].traces.resize(cfg.runs);
  }

  const std::size_t jobs = cells.size() * cfg.runs;
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t cell = job / cfg.runs;
    const auto run = static_cast<std::uint32_t>(job % cfg.runs);
    PolicySpec spec = cfg.policy;
    spec.eps = cfg.epsilons[cell];
    const auto run_id = static_cast<std::uint32_t>(job);
    cells[cell].traces[run] =
        run_policy(spec, env, cfg.horizon, cfg.seed, run_id, checkpoints);
  });

  for (auto& cell : cells) cell.series = aggregate(cell.traces);
  return cells;
}

//===----------------------------------------------------------------------===//
// CSV emission and parsing
//===----------------------------------------------------------------------===//

inline constexpr const char* kRawHeader =
    "policy,epsilon,alpha,seed,run,t,arm,cum_pseudo_regret";
inline constexpr const char* kAggregateHeader =
    "policy,epsilon,alpha,t,mean_regret,std_regret,runs";
inline constexpr const char* kBoundsHeader =
    "K,T,epsilon,alpha,arm,mean,gap,d_inf,t_inf,minimax_lower,pd_lower_rate,"
    "adap_ucb_upper,minimax_upper,regime";
inline constexpr const char* kAuditHeader =
    "sequence,count_orig,count_neigh,log_ratio,slack,verdict";

inline void write_raw_csv(std::ostream& os,
                          std::span<const CellResult> cells) {
  os << kRawHeader << '\n';
  for (const auto& cell : cells) {
    for (std::size_t run = 0; run < cell.traces.size(); ++run) {
      const RunTrace& tr = cell.traces[run];
      for (std::size_t i = 0; i < tr.checkpoint_t.size(); ++i) {
        os << tr.policy << ',' << format_double(tr.epsilon) << ','
           << format_double(tr.alpha) << ',' << tr.seed << ',' << run << ','
           << tr.checkpoint_t[i] << ',' << tr.checkpoint_arm[i] << ','
           << format_double(tr.pseudo_regret[i]) << '\n';
      }
    }
  }
}

inline void write_aggregate_csv(std::ostream& os, const std::string& policy,
                                double alpha,
                                std::span<const CellResult> cells) {
  os << kAggregateHeader << '\n';
  for (const auto& cell : cells) {
    for (std::size_t i = 0; i < cell.series.t.size(); ++i) {
      os << policy << ',' << format_double(cell.epsilon) << ','
         << format_double(alpha) << ',' << cell.series.t[i] << ','
         << format_double(cell.series.mean_regret[i]) << ','
         << format_double(cell.series.std_regret[i]) << ','
         << cell.series.runs << '\n';
    }
  }
}

inline void write_bounds_csv(std::ostream& os,
                             std::span<const BoundReport> reports) {
  os << kBoundsHeader << '\n';
  for (const auto& rep : reports) {
    for (std::size_t a = 0; a < rep.num_arms; ++a) {
      os << rep.num_arms << ',' << format_count(rep.horizon) << ','
         << format_double(rep.eps) << ',' << format_double(rep.alpha) << ','
         << a << ',' << format_double(rep.means[a]) << ','
         << format_double(rep.gaps[a]) << ','
         << format_double(rep.info_gaps[a].d_inf) << ','
         << format_double(rep.info_gaps[a].t_inf) << ','
         << format_double(rep.minimax.value) << ','
         << format_double(rep.pd_lower_rate) << ','
         << format_double(rep.adap_ucb_upper) << ','
         << format_double(rep.minimax_upper) << ','
         << regime_name(rep.minimax.regime) << '\n';
    }
  }
}

inline void write_audit_csv(std::ostream& os, const AuditReport& report,
                            std::size_t num_arms, std::uint64_t horizon) {
  os << kAuditHeader << '\n';
  for (const auto& row : report.rows) {
    os << decode_actions(row.key, num_arms, horizon) << ',' << row.count_orig
       << ',' << row.count_neigh << ',' << format_double(row.log_ratio) << ','
       << format_double(row.slack) << ','
       << (row.pass ? "pass" : "fail") << '\n';
  }
  if (report.rows.empty()) os << ",,,,," << verdict_name(report.verdict) << '\n';
}

struct RawRow {
  std::string policy;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::uint32_t run = 0;
  std::uint64_t t = 0;
  std::uint32_t arm = 0;
  double cum_pseudo_regret = 0.0;
};

inline std::vector<RawRow> parse_raw_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRawHeader)
    throw std::invalid_argument("missing raw CSV header");
  std::vector<RawRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw std::invalid_argument("bad raw CSV row");
    RawRow row;
    row.policy = std::string(f[0]);
    row.epsilon = parse_double(f[1]);
    row.alpha = parse_double(f[2]);
    row.seed = parse_u64(f[3]);
    row.run = static_cast<std::uint32_t>(parse_u64(f[4]));
    row.t = parse_u64(f[5]);
    row.arm = static_cast<std::uint32_t>(parse_u64(f[6]));
    row.cum_pseudo_regret = parse_double(f[7]);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct AggregateRow {
  std::string policy;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::uint64_t t = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  std::uint32_t runs = 0;
};

inline std::vector<AggregateRow> parse_aggregate_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kAggregateHeader)
    throw std::invalid_argument("missing aggregate CSV header");
  std::vector<AggregateRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 7) throw std::invalid_argument("bad aggregate CSV row");
    AggregateRow row;
    row.policy = std::string(f[0]);
    row.epsilon = parse_double(f[1]);
    row.alpha = parse_double(f[2]);
    row.t = parse_u64(f[3]);
    row.mean_regret = parse_double(f[4]);
    row.std_regret = parse_double(f[5]);
    row.runs = static_cast<std::uint32_t>(parse_u64(f[6]));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dpbandit
