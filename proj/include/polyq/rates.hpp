#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/game.hpp"

namespace polyq {

// Per-agent exploration temperatures T_k for the smooth learning dynamics.
// Strictly positive: zero temperature removes the entropy drift the
// convergence guarantees rest on.
class ExplorationRates {
 public:
  explicit ExplorationRates(std::vector<double> temps) : t_(std::move(temps)) {
    if (t_.empty()) throw invalid_input("need at least one exploration rate");
    for (double v : t_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw invalid_input("exploration rates must be positive and finite");
  }

  static ExplorationRates constant(double temp, int agents) {
    return ExplorationRates(std::vector<double>(static_cast<std::size_t>(agents), temp));
  }

  int num_agents() const { return static_cast<int>(t_.size()); }
  double at(int k) const { return t_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& values() const { return t_; }
  double t_min() const { return *std::min_element(t_.begin(), t_.end()); }
  double t_max() const { return *std::max_element(t_.begin(), t_.end()); }

 private:
  std::vector<double> t_;
};

inline void require_matching(const NetworkGame& g, const ExplorationRates& rates) {
  if (rates.num_agents() != g.num_agents())
    throw invalid_input("exploration rates have wrong agent count");
}

// Reward vector of the entropy-regularized game: r_ki - T (ln x_ki + 1).
// This is the gradient of u_k(x) + T H(x_k) in x_k. The scalar overload
// accepts T = 0 (plain reward).
inline std::vector<double> perturbed_reward(const NetworkGame& g, const JointStrategy& x, int k,
                                            double temp) {
  std::vector<double> r = reward_vector(g, x, k);
  if (temp == 0.0) return r;
  const std::vector<double>& xk = x.agent(k);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (xk[i] < kEpsFloor)
      throw boundary_error("entropy term undefined: probability below floor for agent " +
                           std::to_string(k));
    r[i] -= temp * (std::log(xk[i]) + 1.0);
  }
  return r;
}

inline std::vector<double> perturbed_reward(const NetworkGame& g, const JointStrategy& x, int k,
                                            const ExplorationRates& rates) {
  require_matching(g, rates);
  return perturbed_reward(g, x, k, rates.at(k));
}

// u_k(x) + T H(x_k), the payoff of the entropy-regularized game.
inline double perturbed_payoff(const NetworkGame& g, const JointStrategy& x, int k, double temp) {
  double u = payoff(g, x, k);
  if (temp == 0.0) return u;
  double h = 0.0;
  for (double v : x.agent(k))
    if (v > 0.0) h -= v * std::log(v);
  return u + temp * h;
}

inline double perturbed_payoff(const NetworkGame& g, const JointStrategy& x, int k,
                               const ExplorationRates& rates) {
  require_matching(g, rates);
  return perturbed_payoff(g, x, k, rates.at(k));
}

// Entropy-regularized payoff to k for playing `own` against x's neighbors:
// <own, r_k(x_{-k})> + T H(own).
inline double perturbed_payoff_with_own(const NetworkGame& g, const JointStrategy& x, int k,
                                        const std::vector<double>& own, double temp) {
  double u = payoff_with_own(g, x, k, own);
  if (temp == 0.0) return u;
  double h = 0.0;
  for (double v : own)
    if (v > 0.0) h -= v * std::log(v);
  return u + temp * h;
}

}  // namespace polyq
