#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpbandit/bernoulli_kl.hpp"

namespace dpbandit {

// Distinguishability gaps of one arm against the optimal mean level:
// d_inf is the smallest KL divergence to any distribution with mean above
// mu_star, t_inf the smallest total-variation distance.
struct GapPair {
  double d_inf = 0.0;
  double t_inf = 0.0;
};

// Bernoulli specialization: the infimum over {q > mu_star} is approached as
// q -> mu_star, giving d_inf = d(mu_a, mu_star) and t_inf = mu_star - mu_a.
// Optimal arms get (0, 0).
inline std::vector<GapPair> bernoulli_gaps(std::span<const double> means,
                                           double mu_star) {
  if (!(mu_star >= 0.0 && mu_star <= 1.0))
    throw std::invalid_argument("mu_star must lie in [0,1]");
  std::vector<GapPair> out;
  out.reserve(means.size());
  for (double mu : means) {
    if (!(mu >= 0.0 && mu <= 1.0))
      throw std::invalid_argument("means must lie in [0,1]");
    if (mu > mu_star)
      throw std::invalid_argument("mu_star must be the maximum mean");
    if (mu == mu_star) {
      out.push_back({0.0, 0.0});
    } else {
      out.push_back({bernoulli_kl(mu, mu_star), mu_star - mu});
    }
  }
  return out;
}

enum class PrivacyRegime { kHighPrivacy, kLowPrivacy };

inline const char* regime_name(PrivacyRegime r) {
  return r == PrivacyRegime::kHighPrivacy ? "high-privacy" : "low-privacy";
}

// Minimax lower bound max{ sqrt(T(K-1))/27, (K-1)/(131 eps) }.
//
// Two epsilon landmarks are reported. `eps_star` = (131/27) sqrt((K-1)/T) is
// the regime threshold quoted with the bound (the budget above which privacy
// is declared free); `eps_branch_cross` = (27/131) sqrt((K-1)/T) is where the
// two branches of the max are numerically equal. They differ by the square of
// 131/27.
struct MinimaxLowerBound {
  double value = 0.0;
  double nonprivate_branch = 0.0;
  double private_branch = 0.0;
  double eps_star = 0.0;
  double eps_branch_cross = 0.0;
  PrivacyRegime regime = PrivacyRegime::kLowPrivacy;
};

inline MinimaxLowerBound minimax_lower(std::size_t num_arms, double horizon,
                                       double eps) {
  if (num_arms < 2) throw std::invalid_argument("minimax bound needs K > 1");
  const double km1 = static_cast<double>(num_arms - 1);
  if (!(horizon >= km1))
    throw std::invalid_argument("minimax bound needs T >= K - 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");

  MinimaxLowerBound out;
  out.nonprivate_branch = std::sqrt(horizon * km1) / 27.0;
  out.private_branch = km1 / (131.0 * eps);
  out.value = std::max(out.nonprivate_branch, out.private_branch);
  out.eps_star = (131.0 / 27.0) * std::sqrt(km1 / horizon);
  out.eps_branch_cross = (27.0 / 131.0) * std::sqrt(km1 / horizon);
  out.regime = eps < out.eps_star ? PrivacyRegime::kHighPrivacy
                                  : PrivacyRegime::kLowPrivacy;
  return out;
}

// Coefficient of log(T) in the problem-dependent lower bound:
//   sum over suboptimal arms of gap / min(d_inf, 6 eps t_inf).
inline double problem_dependent_lower_rate(std::span<const double> means,
                                           double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (means.empty()) throw std::invalid_argument("empty instance");
  const double mu_star = *std::max_element(means.begin(), means.end());
  const auto gaps = bernoulli_gaps(means, mu_star);
  double total = 0.0;
  for (std::size_t a = 0; a < means.size(); ++a) {
    const double gap = mu_star - means[a];
    if (gap <= 0.0) continue;
    total += gap / std::min(gaps[a].d_inf, 6.0 * eps * gaps[a].t_inf);
  }
  return total;
}

// Explicit regret envelope of the adaptive Hoeffding-index policy:
//   sum over suboptimal arms of 16 alpha log(T)/min(gap, eps) + 3 alpha/(alpha-3).
// Vacuous for alpha <= 3, which is rejected.
inline double adap_ucb_upper_bound(std::span<const double> means, double eps,
                                   double alpha, double horizon) {
  if (!(alpha > 3.0))
    throw std::invalid_argument("regret envelope requires alpha > 3");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (means.empty()) throw std::invalid_argument("empty instance");
  const double mu_star = *std::max_element(means.begin(), means.end());
  const double lt = std::log(horizon);
  double total = 0.0;
  for (double mu : means) {
    const double gap = mu_star - mu;
    if (gap <= 0.0) continue;
    total += 16.0 * alpha * lt / std::min(gap, eps) +
             3.0 * alpha / (alpha - 3.0);
  }
  return total;
}

// Problem-independent regret envelope:
//   8 sqrt(alpha K T log T) + 16 alpha K log(T)/eps + 3 alpha/(alpha-3) * sum(gaps).
inline double minimax_upper_bound(std::size_t num_arms, double horizon,
                                  double eps, double alpha, double sum_gaps) {
  if (num_arms < 2) throw std::invalid_argument("minimax bound needs K > 1");
  if (!(alpha > 3.0))
    throw std::invalid_argument("regret envelope requires alpha > 3");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double k = static_cast<double>(num_arms);
  const double lt = std::log(horizon);
  return 8.0 * std::sqrt(alpha * k * horizon * lt) +
         16.0 * alpha * k * lt / eps +
         3.0 * alpha / (alpha - 3.0) * sum_gaps;
}

// Everything the `bounds` subcommand reports for one (instance, T, eps, alpha).
struct BoundReport {
  std::size_t num_arms = 0;
  double horizon = 0.0;
  double eps = 0.0;
  double alpha = 0.0;
  std::vector<double> means;
  std::vector<double> gaps;
  std::vector<GapPair> info_gaps;
  MinimaxLowerBound minimax;
  double pd_lower_rate = 0.0;
  double adap_ucb_upper = 0.0;
  double minimax_upper = 0.0;
};

inline BoundReport evaluate_bounds(std::span<const double> means,
                                   double horizon, double eps, double alpha) {
  BoundReport rep;
  rep.num_arms = means.size();
  rep.horizon = horizon;
  rep.eps = eps;
  rep.alpha = alpha;
  rep.means.assign(means.begin(), means.end());
  const double mu_star = *std::max_element(means.begin(), means.end());
  double sum_gaps = 0.0;
  for (double mu : means) {
    rep.gaps.push_back(mu_star - mu);
    sum_gaps += mu_star - mu;
  }
  rep.info_gaps = bernoulli_gaps(means, mu_star);
  rep.minimax = minimax_lower(means.size(), horizon, eps);
  rep.pd_lower_rate = problem_dependent_lower_rate(means, eps);
  rep.adap_ucb_upper = adap_ucb_upper_bound(means, eps, alpha, horizon);
  rep.minimax_upper =
      minimax_upper_bound(means.size(), horizon, eps, alpha, sum_gaps);
  return rep;
}

}  // namespace dpbandit
