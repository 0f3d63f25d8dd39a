#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpbandit/rng.hpp"

namespace dpbandit {

// Scale parameter of a centered Laplace distribution; Lap(b) has variance 2b^2
// and tails P(Lap(b) > a) = P(Lap(b) < -a) = exp(-a/b)/2.
struct LaplaceScale {
  explicit LaplaceScale(double scale) : b(scale) {
    if (!(b > 0.0))
      throw std::invalid_argument("Laplace scale must be positive");
  }
  double b;
};

// Inverse-CDF sample of the two-sided exponential. The uniform input lies in
// the open interval (0,1), so the transform is finite and symmetric about 0.
inline double laplace_sample(LaplaceScale scale, Xoshiro256pp& gen) {
  const double u = gen.uniform01();
  return u < 0.5 ? scale.b * std::log(2.0 * u)
                 : -scale.b * std::log(2.0 * (1.0 - u));
}

// eps-DP release of the mean of `count` rewards in [0,1], given their sum.
// A one-reward change moves the mean by at most 1/count, so the calibrated
// noise is Lap(1/(count*eps)). eps = +inf is the exact zero-noise limit.
// The output is left unclipped; clipping is the caller's concern.
inline double private_mean_from_sum(double sum, std::uint64_t count, double eps,
                                    Xoshiro256pp& gen) {
  if (count == 0)
    throw std::invalid_argument("private mean needs a non-empty window");
  if (!(eps > 0.0))
    throw std::invalid_argument("privacy budget must be positive");
  const double mean = sum / static_cast<double>(count);
  if (std::isinf(eps)) return mean;
  return mean +
         laplace_sample(LaplaceScale(1.0 / (static_cast<double>(count) * eps)),
                        gen);
}

// As above, from the reward window itself. Rewards outside [0,1] would break
// the sensitivity calibration and are rejected.
inline double private_window_mean(std::span<const double> rewards, double eps,
                                  Xoshiro256pp& gen) {
  if (rewards.empty())
    throw std::invalid_argument("private mean needs a non-empty window");
  if (!(eps > 0.0))
    throw std::invalid_argument("privacy budget must be positive");
  double sum = 0.0;
  for (double r : rewards) {
    if (!(r >= 0.0 && r <= 1.0))
      throw std::domain_error("reward outside [0,1]");
    sum += r;
  }
  return private_mean_from_sum(sum, rewards.size(), eps, gen);
}

// Streaming binary-tree mechanism for private prefix sums over a stream of
// known capacity T. Each tree node holds one Lap(ceil(log2 T)/eps) sample; the
// sum released at step t aggregates one noisy partial sum per set bit of t,
// i.e. at most ceil(log2 t) + 1 noise terms.
class TreeMechanism {
 public:
  TreeMechanism(std::uint64_t capacity, double eps) : capacity_(capacity) {
    if (capacity < 2)
      throw std::invalid_argument("tree mechanism needs capacity >= 2");
    if (!(eps > 0.0))
      throw std::invalid_argument("privacy budget must be positive");
    const int levels = std::bit_width(capacity);
    const double depth = static_cast<double>(std::bit_width(capacity - 1));
    scale_ = std::isinf(eps) ? 0.0 : depth / eps;
    partial_.assign(levels + 1, 0.0);
    noisy_.assign(levels + 1, 0.0);
  }

  // Appends one value and returns the noisy prefix sum of everything so far.
  double add_and_query(double value, Xoshiro256pp& gen) {
    if (count_ >= capacity_)
      throw std::length_error("tree mechanism past capacity");
    ++count_;
    const int level = std::countr_zero(count_);
    double acc = value;
    for (int j = 0; j < level; ++j) {
      acc += partial_[j];
      partial_[j] = 0.0;
      noisy_[j] = 0.0;
    }
    partial_[level] = acc;
    noisy_[level] =
        acc + (scale_ > 0.0 ? laplace_sample(LaplaceScale(scale_), gen) : 0.0);

    double out = 0.0;
    for (std::uint64_t bits = count_; bits != 0; bits &= bits - 1)
      out += noisy_[std::countr_zero(bits)];
    return out;
  }

  std::uint64_t count() const { return count_; }
  int active_noise_terms() const { return std::popcount(count_); }
  double node_scale() const { return scale_; }

 private:
  std::uint64_t capacity_;
  std::uint64_t count_ = 0;
  double scale_;
  std::vector<double> partial_;
  std::vector<double> noisy_;
};

}  // namespace dpbandit
