#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dpbandit/rng.hpp"

namespace dpbandit {

// A bounded reward distribution on [0,1].
struct ArmModel {
  enum class Kind { kBernoulli, kBoundedUniform };

  static ArmModel bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("Bernoulli mean must lie in [0,1]");
    ArmModel m;
    m.kind = Kind::kBernoulli;
    m.a = p;
    m.b = p;
    return m;
  }

  static ArmModel bounded_uniform(double lo, double hi) {
    if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
      throw std::invalid_argument("uniform support must satisfy 0 <= lo <= hi <= 1");
    ArmModel m;
    m.kind = Kind::kBoundedUniform;
    m.a = lo;
    m.b = hi;
    return m;
  }

  double mean() const { return kind == Kind::kBernoulli ? a : 0.5 * (a + b); }

  double sample(Xoshiro256pp& gen) const {
    return kind == Kind::kBernoulli ? gen.bernoulli(a)
                                    : a + (b - a) * gen.uniform01();
  }

  Kind kind = Kind::kBernoulli;
  double a = 0.0;  // Bernoulli: p.  BoundedUniform: lo.
  double b = 0.0;  // BoundedUniform: hi.
};

// Immutable K-armed environment (K >= 2). Shareable across threads.
class Environment {
 public:
  explicit Environment(std::vector<ArmModel> arms) : arms_(std::move(arms)) {
    if (arms_.size() < 2)
      throw std::invalid_argument("an environment needs at least two arms");
    mu_star_ = arms_[0].mean();
    for (const auto& arm : arms_) mu_star_ = std::max(mu_star_, arm.mean());
  }

  static Environment bernoulli(std::span<const double> means) {
    std::vector<ArmModel> arms;
    arms.reserve(means.size());
    for (double p : means) arms.push_back(ArmModel::bernoulli(p));
    return Environment(std::move(arms));
  }

  std::size_t num_arms() const { return arms_.size(); }
  const ArmModel& arm(std::size_t a) const { return arms_[a]; }
  double mean(std::size_t a) const { return arms_[a].mean(); }
  double mu_star() const { return mu_star_; }
  double gap(std::size_t a) const { return mu_star_ - arms_[a].mean(); }

  std::vector<double> means() const {
    std::vector<double> out;
    out.reserve(arms_.size());
    for (const auto& arm : arms_) out.push_back(arm.mean());
    return out;
  }

  // (mu_a, gap_a) per arm, in arm order; the minimum gap is always 0.
  std::vector<std::pair<double, double>> instance_gaps() const {
    std::vector<std::pair<double, double>> out;
    out.reserve(arms_.size());
    for (std::size_t a = 0; a < arms_.size(); ++a)
      out.emplace_back(mean(a), gap(a));
    return out;
  }

 private:
  std::vector<ArmModel> arms_;
  double mu_star_;
};

inline double sample_reward(const Environment& env, std::size_t arm,
                            SeededRng& rng) {
  if (arm >= env.num_arms())
    throw std::out_of_range("arm index out of range");
  return env.arm(arm).sample(
      rng.stream(Stream::kReward, static_cast<std::uint32_t>(arm)));
}

}  // namespace dpbandit
