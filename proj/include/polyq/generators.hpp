#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/game.hpp"
#include "polyq/matrix.hpp"
#include "polyq/mpd.hpp"
#include "polyq/rng.hpp"

namespace polyq {

// Interior strategy with logits drawn from a centered gaussian; sigma 0
// degenerates to uniform play.
inline JointStrategy random_logit_strategy(const std::vector<int>& counts, std::uint64_t seed,
                                           double sigma = 1.0) {
  Rng rng(seed);
  std::vector<std::vector<double>> probs;
  probs.reserve(counts.size());
  for (int c : counts) {
    std::vector<double> z(static_cast<std::size_t>(c));
    for (double& v : z) v = sigma * rng.gaussian();
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
      v = std::exp(v - zmax);
      sum += v;
    }
    for (double& v : z) v /= sum;
    probs.push_back(std::move(z));
  }
  return JointStrategy(std::move(probs));
}

inline std::vector<std::pair<int, int>> chain_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

inline std::vector<std::pair<int, int>> complete_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

// Connected graph: a random attachment tree plus each remaining pair kept
// with probability p. Edge list is ordered lexicographically, so the output
// depends only on the draws, not on container iteration order.
inline std::vector<std::pair<int, int>> random_connected_edges(int n, double p, Rng& rng) {
  if (n < 2) throw invalid_input("graph needs at least two nodes");
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(n),
                                     std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int v = 1; v < n; ++v) {
    int u = std::min(static_cast<int>(rng.canonical() * v), v - 1);
    adj[u][v] = adj[v][u] = 1;
  }
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (!adj[i][j] && rng.canonical() < p) adj[i][j] = 1;
      if (adj[i][j]) e.emplace_back(i, j);
    }
  return e;
}

// Seeded recipe for a game instance. `actions` is broadcast to all agents
// when it has a single element.
struct GeneratorSpec {
  std::string kind = "nzsg_random";  // nzsg_random | conflict
  std::string graph = "chain";       // chain | complete | random
  int agents = 3;
  std::vector<int> actions = {2};
  std::uint64_t seed = 0;
  double entry_lo = -1.0;
  double entry_hi = 1.0;
  double edge_prob = 0.5;  // only for graph == random
};

namespace detail {

inline std::vector<int> broadcast_actions(const GeneratorSpec& spec) {
  if (spec.agents < 2) throw invalid_input("generator needs at least two agents");
  if (spec.actions.empty()) throw invalid_input("generator needs action counts");
  if (spec.actions.size() == 1)
    return std::vector<int>(static_cast<std::size_t>(spec.agents), spec.actions[0]);
  if (static_cast<int>(spec.actions.size()) != spec.agents)
    throw invalid_input("action count list does not match agent count");
  return spec.actions;
}

inline std::vector<std::pair<int, int>> graph_edges(const GeneratorSpec& spec, Rng& rng) {
  if (spec.graph == "chain") return chain_edges(spec.agents);
  if (spec.graph == "complete") return complete_edges(spec.agents);
  if (spec.graph == "random") return random_connected_edges(spec.agents, spec.edge_prob, rng);
  throw invalid_input("unknown graph kind: " + spec.graph);
}

}  // namespace detail

// Random network zero-sum game: per edge, draw the forward matrix uniformly
// from the entry range and a per-edge constant (the last one balancing the
// rest to zero), then set the reverse matrix to complement the constant:
// A^{lk}_{ji} = c_e - A^{kl}_{ij}. Zero-sum holds by construction.
inline NetworkGame generate_nzsg(const GeneratorSpec& spec) {
  if (!(spec.entry_lo <= spec.entry_hi)) throw invalid_input("empty entry range");
  const std::vector<int> counts = detail::broadcast_actions(spec);
  Rng rng(spec.seed);
  const auto pairs = detail::graph_edges(spec, rng);
  std::vector<Matrix> fwd;
  fwd.reserve(pairs.size());
  for (const auto& [k, l] : pairs) {
    Matrix a(static_cast<std::size_t>(counts[k]), static_cast<std::size_t>(counts[l]));
    for (double& v : a.data()) v = rng.uniform(spec.entry_lo, spec.entry_hi);
    fwd.push_back(std::move(a));
  }
  std::vector<double> c(pairs.size(), 0.0);
  if (!pairs.empty()) {
    double acc = 0.0;
    for (std::size_t e = 0; e + 1 < pairs.size(); ++e) {
      c[e] = rng.uniform(spec.entry_lo, spec.entry_hi);
      acc += c[e];
    }
    c.back() = -acc;
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto& [k, l] = pairs[e];
    Matrix b(fwd[e].cols(), fwd[e].rows());
    for (std::size_t i = 0; i < fwd[e].rows(); ++i)
      for (std::size_t j = 0; j < fwd[e].cols(); ++j) b(j, i) = c[e] - fwd[e](i, j);
    edges.push_back(Edge{k, l, std::move(fwd[e]), std::move(b)});
  }
  return NetworkGame(counts, std::move(edges));
}

// Largest certified distance that entrywise noise of magnitude eps can
// produce, from the structure alone.
inline double structural_delta_abs(const NetworkGame& g, double eps) {
  double f = 0.0;
  for (int k = 0; k < g.num_agents(); ++k)
    f = std::max(f, detail::agent_bound_factor(g, k));
  return f * eps;
}

// Inverts the entrywise certificate: the noise magnitude whose structural
// bound equals delta.
inline double epsilon_for_delta_abs(const NetworkGame& g, double delta) {
  if (!(delta >= 0.0)) throw invalid_input("target distance must be nonnegative");
  double f = 0.0;
  for (int k = 0; k < g.num_agents(); ++k)
    f = std::max(f, detail::agent_bound_factor(g, k));
  if (f <= 0.0) throw invalid_input("game has no edges to perturb");
  return delta / f;
}

struct PerturbedGame {
  NetworkGame game;
  MpdBound certificate;  // structural entrywise bound implied by epsilon
  double epsilon = 0.0;
};

namespace detail {

// Adds eps-scaled unit noise to every entry, edge by edge, A then B. Noise
// is drawn as unit deviates and scaled, so runs that share a seed but differ
// in eps see proportional perturbations.
inline NetworkGame add_entry_noise(const NetworkGame& g, double eps, Rng& rng) {
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) {
    for (double& v : e.a.data()) v += eps * rng.symmetric(1.0);
    for (double& v : e.b.data()) v += eps * rng.symmetric(1.0);
  }
  return NetworkGame(g.action_counts(), std::move(edges));
}

}  // namespace detail

inline PerturbedGame perturb_game(const NetworkGame& g, double eps, std::uint64_t seed) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw invalid_input("perturbation magnitude must be nonnegative");
  Rng rng(seed);
  NetworkGame noisy = detail::add_entry_noise(g, eps, rng);
  return PerturbedGame{std::move(noisy),
                       MpdBound{structural_delta_abs(g, eps), MpdKind::abs_entry_bound}, eps};
}

// One side of a contested interaction: success probabilities for each
// direction plus per-action costs.
struct ConflictEdge {
  int from = 0;
  int to = 0;
  Matrix p_fwd;                  // n_from x n_to
  Matrix p_bwd;                  // n_to x n_from
  std::vector<double> cost_fwd;  // length n_from
  std::vector<double> cost_bwd;  // length n_to
};

// Conflict network: A^{kl}_{ij} = v_k P^{kl}_{ij} - c^{kl}_i, where the
// success matrices of the two directions complement each other,
// P^{kl}_{ij} + P^{lk}_{ji} = 1.
inline NetworkGame conflict_network(const std::vector<int>& counts,
                                    const std::vector<double>& valuations,
                                    const std::vector<ConflictEdge>& cedges) {
  if (valuations.size() != counts.size())
    throw invalid_input("one valuation per agent required");
  for (double v : valuations)
    if (!(v > 0.0)) throw invalid_input("valuations must be positive");
  std::vector<Edge> edges;
  edges.reserve(cedges.size());
  for (const ConflictEdge& ce : cedges) {
    if (ce.from < 0 || ce.from >= static_cast<int>(counts.size()) || ce.to < 0 ||
        ce.to >= static_cast<int>(counts.size()))
      throw invalid_input("conflict edge endpoint out of range");
    const std::size_t nf = static_cast<std::size_t>(counts[ce.from]);
    const std::size_t nt = static_cast<std::size_t>(counts[ce.to]);
    if (ce.p_fwd.rows() != nf || ce.p_fwd.cols() != nt || ce.p_bwd.rows() != nt ||
        ce.p_bwd.cols() != nf)
      throw invalid_input("success matrix has the wrong shape");
    if (ce.cost_fwd.size() != nf || ce.cost_bwd.size() != nt)
      throw invalid_input("cost vector has the wrong length");
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nt; ++j)
        if (std::abs(ce.p_fwd(i, j) + ce.p_bwd(j, i) - 1.0) > 1e-9)
          throw invalid_input("success matrices must complement each other");
    Matrix a(nf, nt), b(nt, nf);
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nt; ++j)
        a(i, j) = valuations[ce.from] * ce.p_fwd(i, j) - ce.cost_fwd[i];
    for (std::size_t j = 0; j < nt; ++j)
      for (std::size_t i = 0; i < nf; ++i)
        b(j, i) = valuations[ce.to] * ce.p_bwd(j, i) - ce.cost_bwd[j];
    edges.push_back(Edge{ce.from, ce.to, std::move(a), std::move(b)});
  }
  return NetworkGame(counts, std::move(edges));
}

// The fixed three-agent instance: a triangle where every agent plays the
// same pair of matrices, one toward its successor and one toward its
// predecessor.
inline NetworkGame conflict_triangle_preset() {
  const Matrix succ = Matrix::from_rows({{2.4, 6.6}, {4.5, 3.1}});
  const Matrix pred = Matrix::from_rows({{2.8, 1.0}, {4.2, 7.2}});
  std::vector<Edge> edges;
  edges.push_back(Edge{0, 1, succ, pred});
  edges.push_back(Edge{1, 2, succ, pred});
  edges.push_back(Edge{2, 0, succ, pred});
  return NetworkGame({2, 2, 2}, std::move(edges));
}

// Random conflict instance: valuations uniform on [0.5, 2], success entries
// uniform on [0, 1] with the complement enforced, costs uniform on [0, 1].
inline NetworkGame generate_conflict(const GeneratorSpec& spec) {
  const std::vector<int> counts = detail::broadcast_actions(spec);
  Rng rng(spec.seed);
  const auto pairs = detail::graph_edges(spec, rng);
  std::vector<double> v(counts.size());
  for (double& t : v) t = rng.uniform(0.5, 2.0);
  std::vector<ConflictEdge> cedges;
  cedges.reserve(pairs.size());
  for (const auto& [k, l] : pairs) {
    ConflictEdge ce;
    ce.from = k;
    ce.to = l;
    const std::size_t nf = static_cast<std::size_t>(counts[k]);
    const std::size_t nt = static_cast<std::size_t>(counts[l]);
    ce.p_fwd = Matrix(nf, nt);
    ce.p_bwd = Matrix(nt, nf);
    for (std::size_t i = 0; i < nf; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        ce.p_fwd(i, j) = rng.canonical();
        ce.p_bwd(j, i) = 1.0 - ce.p_fwd(i, j);
      }
    ce.cost_fwd.resize(nf);
    ce.cost_bwd.resize(nt);
    for (double& t : ce.cost_fwd) t = rng.canonical();
    for (double& t : ce.cost_bwd) t = rng.canonical();
    cedges.push_back(std::move(ce));
  }
  return conflict_network(counts, v, cedges);
}

inline NetworkGame generate_game(const GeneratorSpec& spec) {
  if (spec.kind == "nzsg_random") return generate_nzsg(spec);
  if (spec.kind == "conflict") return generate_conflict(spec);
  throw invalid_input("unknown generator kind: " + spec.kind);
}

}  // namespace polyq
