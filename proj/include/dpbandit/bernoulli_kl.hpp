#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpbandit {

// Relative entropy d(p, q) between Bernoulli(p) and Bernoulli(q), with the
// usual boundary conventions: d(0, q) = log(1/(1-q)), d(1, q) = log(1/q),
// and d(p, 0) = d(p, 1) = +inf unless p equals the endpoint.
inline double bernoulli_kl(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("bernoulli_kl arguments must lie in [0,1]");
  if (p == q) return 0.0;
  if (q <= 0.0 || q >= 1.0) return std::numeric_limits<double>::infinity();
  double acc = 0.0;
  if (p > 0.0) acc += p * std::log(p / q);
  if (p < 1.0) acc += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return acc;
}

// Largest q in [0,1] with d(mu, q) <= budget: the upper branch of the KL
// confidence set. Since d(mu, .) is increasing on [mu, 1], bisection applies;
// it runs on w = log(1-q) so the divergence stays accurate when the root sits
// within a few ulps of 1. Terminates when |d(mu, q) - budget| <= 1e-12 or
// after 100 halvings, whichever comes first.
inline double kl_upper_inverse(double mu, double budget) {
  if (!(mu >= 0.0 && mu <= 1.0))
    throw std::invalid_argument("kl_upper_inverse mean must lie in [0,1]");
  if (!(budget >= 0.0))
    throw std::invalid_argument("kl_upper_inverse budget must be nonnegative");
  if (budget == 0.0) return mu;
  if (mu >= 1.0) return 1.0;
  if (std::isinf(budget)) return 1.0;

  // d(mu, 1 - e^w) for w <= log(1-mu); decreasing in w.
  const auto div_at = [mu](double w) {
    const double v = std::exp(w);
    double acc = (1.0 - mu) * (std::log1p(-mu) - w);
    if (mu > 0.0) acc += mu * (std::log(mu) - std::log1p(-v));
    return acc;
  };

  double w_feasible = std::log1p(-mu);  // q = mu, divergence 0
  double w_infeasible = std::log(std::numeric_limits<double>::min());
  if (div_at(w_infeasible) <= budget) {
    // Root closer to 1 than doubles can represent; saturate.
    return 1.0 - std::numeric_limits<double>::min();
  }
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (w_feasible + w_infeasible);
    const double d = div_at(mid);
    if (std::abs(d - budget) <= 1e-12) {
      w_feasible = mid;
      break;
    }
    (d <= budget ? w_feasible : w_infeasible) = mid;
  }
  return 1.0 - std::exp(w_feasible);
}

}  // namespace dpbandit
