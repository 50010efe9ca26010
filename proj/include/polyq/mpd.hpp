#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "polyq/game.hpp"
#include "polyq/matrix.hpp"
#include "polyq/rates.hpp"
#include "polyq/rng.hpp"

namespace polyq {

// How a game-distance value was produced. The two closed-form bounds never
// undershoot the exact value; `exact` can silently degrade to
// `abs_entry_bound` when enumeration is out of budget.
enum class MpdKind { exact, abs_entry_bound, two_norm_bound };

inline const char* to_string(MpdKind k) {
  switch (k) {
    case MpdKind::exact: return "exact";
    case MpdKind::abs_entry_bound: return "abs_entry_bound";
    default: return "two_norm_bound";
  }
}

struct MpdBound {
  double value = 0.0;
  MpdKind kind = MpdKind::exact;
};

namespace detail {

// Difference blocks of agent k's side along each incident edge.
inline std::vector<Matrix> difference_blocks(const NetworkGame& g1, const NetworkGame& g2,
                                             int k) {
  std::vector<Matrix> d;
  d.reserve(g1.incident(k).size());
  const auto& inc1 = g1.incident(k);
  const auto& inc2 = g2.incident(k);
  for (std::size_t e = 0; e < inc1.size(); ++e) d.push_back(g1.block(inc1[e]) - g2.block(inc2[e]));
  return d;
}

// Pinned certificate multiplier: 2 n_k times the total action count of k's
// neighborhood.
inline double agent_bound_factor(const NetworkGame& g, int k) {
  double nbr_actions = 0.0;
  for (const IncidentEdge& ie : g.incident(k)) nbr_actions += g.actions(ie.neighbor);
  return 2.0 * static_cast<double>(g.actions(k)) * nbr_actions;
}

inline double agent_abs_bound(const NetworkGame& g1, const NetworkGame& g2, int k) {
  double worst = 0.0;
  for (const Matrix& d : difference_blocks(g1, g2, k)) worst = std::max(worst, d.max_abs());
  return agent_bound_factor(g1, k) * worst;
}

}  // namespace detail

// Maximum pairwise difference between two games over the same interaction
// structure: the largest spread, over agents and opponent strategies, of the
// per-action reward difference between the games. The spread is a max of
// linear functions of the neighbors' mixtures, so pure neighbor profiles
// attain it and enumeration is exact. Agents whose neighbor profile count
// exceeds `enumeration_cap` fall back to the entrywise certificate, which
// downgrades the result's kind.
inline MpdBound mpd_exact(const NetworkGame& g1, const NetworkGame& g2,
                          double enumeration_cap = 1.0e6) {
  require_same_structure(g1, g2);
  MpdBound out{0.0, MpdKind::exact};
  for (int k = 0; k < g1.num_agents(); ++k) {
    const auto& inc = g1.incident(k);
    std::vector<int> nbr_counts;
    nbr_counts.reserve(inc.size());
    double profiles = 1.0;
    for (const IncidentEdge& ie : inc) {
      nbr_counts.push_back(g1.actions(ie.neighbor));
      profiles *= static_cast<double>(g1.actions(ie.neighbor));
    }
    if (profiles > enumeration_cap) {
      out.kind = MpdKind::abs_entry_bound;
      out.value = std::max(out.value, detail::agent_abs_bound(g1, g2, k));
      continue;
    }
    const std::vector<Matrix> d = detail::difference_blocks(g1, g2, k);
    const std::size_t nk = static_cast<std::size_t>(g1.actions(k));
    std::vector<double> diff(nk);
    double agent_worst = 0.0;
    for_each_pure_profile(nbr_counts, [&](const std::vector<int>& s) {
      for (std::size_t i = 0; i < nk; ++i) {
        double acc = 0.0;
        for (std::size_t e = 0; e < d.size(); ++e)
          acc += d[e](i, static_cast<std::size_t>(s[e]));
        diff[i] = acc;
      }
      const auto [lo, hi] = std::minmax_element(diff.begin(), diff.end());
      agent_worst = std::max(agent_worst, *hi - *lo);
    });
    out.value = std::max(out.value, agent_worst);
  }
  return out;
}

// Entrywise certificate: per agent, the bound factor times the largest
// absolute entry among its difference blocks.
inline MpdBound mpd_bound_abs(const NetworkGame& g1, const NetworkGame& g2) {
  require_same_structure(g1, g2);
  MpdBound out{0.0, MpdKind::abs_entry_bound};
  for (int k = 0; k < g1.num_agents(); ++k)
    out.value = std::max(out.value, detail::agent_abs_bound(g1, g2, k));
  return out;
}

// Spectral certificate: same factor, spectral norm in place of the largest
// entry. Never below the entrywise certificate.
inline MpdBound mpd_bound_2norm(const NetworkGame& g1, const NetworkGame& g2) {
  require_same_structure(g1, g2);
  MpdBound out{0.0, MpdKind::two_norm_bound};
  for (int k = 0; k < g1.num_agents(); ++k) {
    double worst = 0.0;
    for (const Matrix& d : detail::difference_blocks(g1, g2, k))
      worst = std::max(worst, spectral_norm(d));
    out.value = std::max(out.value, detail::agent_bound_factor(g1, k) * worst);
  }
  return out;
}

namespace detail {

inline std::vector<double> random_simplex_point(Rng& rng, int n) {
  std::vector<double> p(static_cast<std::size_t>(n));
  double tot = 0.0;
  for (double& v : p) {
    v = std::exp(rng.uniform(-3.0, 3.0));
    tot += v;
  }
  for (double& v : p) v /= tot;
  return p;
}

inline JointStrategy random_joint_strategy(Rng& rng, const std::vector<int>& counts) {
  std::vector<std::vector<double>> probs;
  probs.reserve(counts.size());
  for (int c : counts) probs.push_back(random_simplex_point(rng, c));
  return JointStrategy(std::move(probs));
}

}  // namespace detail

// The entropy term of the regularized payoff depends only on the agent's own
// mixture, so it cancels from every between-game difference: the distance
// integrand of the regularized games equals that of the originals pointwise.
// Returns the largest discrepancy over sampled (agent, own mixture, opponent
// profile) triples; it should sit at rounding level.
inline double entropy_perturbation_mpd_discrepancy(const NetworkGame& g1, const NetworkGame& g2,
                                                   const ExplorationRates& rates, int samples,
                                                   std::uint64_t seed) {
  require_same_structure(g1, g2);
  require_matching(g1, rates);
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const JointStrategy x = detail::random_joint_strategy(rng, g1.action_counts());
    for (int k = 0; k < g1.num_agents(); ++k) {
      const std::vector<double> own = detail::random_simplex_point(rng, g1.actions(k));
      const double temp = rates.at(k);
      const double reg = perturbed_payoff_with_own(g1, x, k, own, temp) -
                         perturbed_payoff_with_own(g2, x, k, own, temp);
      const double raw = payoff_with_own(g1, x, k, own) - payoff_with_own(g2, x, k, own);
      worst = std::max(worst, std::abs(reg - raw));
    }
  }
  return worst;
}

inline bool perturbed_game_mpd_identity_check(const NetworkGame& g1, const NetworkGame& g2,
                                              const ExplorationRates& rates, int samples = 1000,
                                              std::uint64_t seed = 0, double tol = 1e-10) {
  return entropy_perturbation_mpd_discrepancy(g1, g2, rates, samples, seed) <= tol;
}

}  // namespace polyq
