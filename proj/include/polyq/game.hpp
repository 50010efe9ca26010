#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/matrix.hpp"

namespace polyq {

// Probabilities this close to zero are treated as sitting on the simplex
// boundary; logit coordinates and KL terms blow up past this floor.
inline constexpr double kEpsFloor = 1e-12;
// Slack accepted when validating that a vector lies on the simplex.
inline constexpr double kSimplexTol = 1e-12;

// One interaction between two agents. `a` is the payoff block of `from`
// against `to` (rows indexed by from's actions), `b` the block of `to`
// against `from` (rows indexed by to's actions).
struct Edge {
  int from = 0;
  int to = 0;
  Matrix a;
  Matrix b;
};

// Adjacency record: how agent k sees edge `edge_index`. `forward` means k is
// the edge's `from` endpoint, so k's block is `a`; otherwise it is `b`.
struct IncidentEdge {
  int neighbor = 0;
  std::size_t edge_index = 0;
  bool forward = true;
};

// A polymatrix game on a graph: each agent's payoff is the sum of bimatrix
// payoffs against its neighbors.
class NetworkGame {
 public:
  NetworkGame(std::vector<int> action_counts, std::vector<Edge> edges)
      : action_counts_(std::move(action_counts)), edges_(std::move(edges)) {
    const int n = static_cast<int>(action_counts_.size());
    if (n < 2) throw invalid_input("a network game needs at least two agents");
    for (int c : action_counts_)
      if (c < 2) throw invalid_input("every agent needs at least two actions");
    incident_.assign(action_counts_.size(), {});
    std::vector<std::vector<char>> seen(action_counts_.size(),
                                        std::vector<char>(action_counts_.size(), 0));
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const Edge& ed = edges_[e];
      if (ed.from < 0 || ed.from >= n || ed.to < 0 || ed.to >= n)
        throw invalid_input("edge endpoint out of range");
      if (ed.from == ed.to) throw invalid_input("self-edges are not allowed");
      if (seen[ed.from][ed.to] || seen[ed.to][ed.from])
        throw invalid_input("duplicate edge between agents " + std::to_string(ed.from) + " and " +
                            std::to_string(ed.to));
      seen[ed.from][ed.to] = 1;
      const auto nf = static_cast<std::size_t>(action_counts_[ed.from]);
      const auto nt = static_cast<std::size_t>(action_counts_[ed.to]);
      if (ed.a.rows() != nf || ed.a.cols() != nt)
        throw invalid_input("edge matrix A has the wrong shape");
      if (ed.b.rows() != nt || ed.b.cols() != nf)
        throw invalid_input("edge matrix B has the wrong shape");
      if (!ed.a.all_finite() || !ed.b.all_finite())
        throw invalid_input("edge matrices must be finite");
      incident_[ed.from].push_back({ed.to, e, true});
      incident_[ed.to].push_back({ed.from, e, false});
    }
  }

  int num_agents() const { return static_cast<int>(action_counts_.size()); }
  int actions(int k) const { return action_counts_[k]; }
  const std::vector<int>& action_counts() const { return action_counts_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::vector<Edge>& edges() { return edges_; }
  const std::vector<IncidentEdge>& incident(int k) const { return incident_[k]; }

  // Payoff block of k against adjacent l, oriented so rows are k's actions.
  const Matrix& block(const IncidentEdge& ie) const {
    return ie.forward ? edges_[ie.edge_index].a : edges_[ie.edge_index].b;
  }

  bool same_structure(const NetworkGame& o) const {
    if (action_counts_ != o.action_counts_ || edges_.size() != o.edges_.size()) return false;
    for (std::size_t e = 0; e < edges_.size(); ++e)
      if (edges_[e].from != o.edges_[e].from || edges_[e].to != o.edges_[e].to) return false;
    return true;
  }

 private:
  std::vector<int> action_counts_;
  std::vector<Edge> edges_;
  std::vector<std::vector<IncidentEdge>> incident_;
};

// One mixed strategy per agent. Construction validates and lightly repairs
// rounding-level simplex violations; anything worse is rejected.
class JointStrategy {
 public:
  explicit JointStrategy(std::vector<std::vector<double>> probs) : x_(std::move(probs)) {
    for (auto& xk : x_) {
      if (xk.empty()) throw invalid_input("empty strategy vector");
      double sum = 0.0;
      for (double& v : xk) {
        if (!std::isfinite(v)) throw invalid_input("strategy entries must be finite");
        if (v < 0.0) {
          if (v < -kSimplexTol) throw invalid_input("strategy entry is negative");
          v = 0.0;
        }
        sum += v;
      }
      if (std::abs(sum - 1.0) > kSimplexTol) throw invalid_input("strategy does not sum to one");
      for (double& v : xk) v /= sum;
    }
  }

  static JointStrategy uniform(const std::vector<int>& counts) {
    std::vector<std::vector<double>> p;
    p.reserve(counts.size());
    for (int c : counts) p.emplace_back(c, 1.0 / static_cast<double>(c));
    return JointStrategy(std::move(p));
  }
  static JointStrategy uniform(const NetworkGame& g) { return uniform(g.action_counts()); }

  int num_agents() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& agent(int k) const { return x_[k]; }
  const std::vector<std::vector<double>>& probs() const { return x_; }

  bool is_interior(double floor = kEpsFloor) const {
    for (const auto& xk : x_)
      for (double v : xk)
        if (v < floor) return false;
    return true;
  }

 private:
  std::vector<std::vector<double>> x_;
};

inline void require_same_structure(const NetworkGame& a, const NetworkGame& b) {
  if (!a.same_structure(b))
    throw invalid_input("games must share agents, action counts and edge list");
}

inline void require_matching(const NetworkGame& g, const JointStrategy& x) {
  if (x.num_agents() != g.num_agents()) throw invalid_input("strategy has wrong agent count");
  for (int k = 0; k < g.num_agents(); ++k)
    if (static_cast<int>(x.agent(k).size()) != g.actions(k))
      throw invalid_input("strategy has wrong action count for agent " + std::to_string(k));
}

// r_k(x_{-k}): expected payoff of each of k's actions against the neighbors'
// current mixtures.
inline std::vector<double> reward_vector(const NetworkGame& g, const JointStrategy& x, int k) {
  std::vector<double> r(static_cast<std::size_t>(g.actions(k)), 0.0);
  for (const IncidentEdge& ie : g.incident(k)) {
    const Matrix& blk = g.block(ie);
    const std::vector<double>& xl = x.agent(ie.neighbor);
    for (std::size_t i = 0; i < r.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < xl.size(); ++j) acc += blk(i, j) * xl[j];
      r[i] += acc;
    }
  }
  return r;
}

inline std::vector<std::vector<double>> reward_vectors(const NetworkGame& g,
                                                       const JointStrategy& x) {
  std::vector<std::vector<double>> r;
  r.reserve(static_cast<std::size_t>(g.num_agents()));
  for (int k = 0; k < g.num_agents(); ++k) r.push_back(reward_vector(g, x, k));
  return r;
}

inline double payoff(const NetworkGame& g, const JointStrategy& x, int k) {
  const std::vector<double> r = reward_vector(g, x, k);
  const std::vector<double>& xk = x.agent(k);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += xk[i] * r[i];
  return acc;
}

// Payoff to k when it plays `own` while everyone else follows x.
inline double payoff_with_own(const NetworkGame& g, const JointStrategy& x, int k,
                              const std::vector<double>& own) {
  const std::vector<double> r = reward_vector(g, x, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) acc += own[i] * r[i];
  return acc;
}

// Best unilateral deviation gain per agent; zero at an exact equilibrium.
struct NashGap {
  std::vector<double> per_agent;
  double max_gap = 0.0;
};

inline NashGap approximate_nash_gap(const NetworkGame& g, const JointStrategy& x) {
  require_matching(g, x);
  NashGap out;
  out.per_agent.resize(static_cast<std::size_t>(g.num_agents()));
  for (int k = 0; k < g.num_agents(); ++k) {
    const std::vector<double> r = reward_vector(g, x, k);
    double best = *std::max_element(r.begin(), r.end());
    double cur = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) cur += x.agent(k)[i] * r[i];
    out.per_agent[k] = best - cur;
    out.max_gap = std::max(out.max_gap, out.per_agent[k]);
  }
  return out;
}

inline double total_profiles(const std::vector<int>& counts) {
  double p = 1.0;
  for (int c : counts) p *= static_cast<double>(c);
  return p;
}

// Visit every pure action profile over `counts` (odometer order).
template <class F>
void for_each_pure_profile(const std::vector<int>& counts, F&& f) {
  std::vector<int> s(counts.size(), 0);
  if (counts.empty()) {
    f(s);
    return;
  }
  for (;;) {
    f(const_cast<const std::vector<int>&>(s));
    std::size_t k = 0;
    while (k < s.size()) {
      if (++s[k] < counts[k]) break;
      s[k] = 0;
      ++k;
    }
    if (k == s.size()) return;
  }
}

namespace detail {

// Total welfare at a pure profile, written with the per-edge interaction
// sums M^e = A + B^T so each edge contributes one lookup.
inline std::vector<Matrix> edge_interaction_sums(const NetworkGame& g) {
  std::vector<Matrix> m;
  m.reserve(g.edges().size());
  for (const Edge& e : g.edges()) m.push_back(e.a + e.b.transpose());
  return m;
}

}  // namespace detail

// Largest absolute total welfare over pure profiles. Multilinearity makes
// pure profiles sufficient: the game is zero-sum iff this vanishes. Above
// `enumeration_cap` profiles the exact maximum is replaced by a certified
// upper bound assembled from a reference profile, its single deviations and
// its paired deviations along edges; the bound is zero exactly when the game
// is zero-sum, so zero-sum verdicts are unaffected.
inline double zero_sum_residual(const NetworkGame& g, double enumeration_cap = 4.0e6) {
  const std::vector<Matrix> m = detail::edge_interaction_sums(g);
  const auto& edges = g.edges();
  if (total_profiles(g.action_counts()) <= enumeration_cap) {
    double worst = 0.0;
    for_each_pure_profile(g.action_counts(), [&](const std::vector<int>& s) {
      double tot = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e)
        tot += m[e](static_cast<std::size_t>(s[edges[e].from]),
                    static_cast<std::size_t>(s[edges[e].to]));
      worst = std::max(worst, std::abs(tot));
    });
    return worst;
  }
  // G(s) = base + sum_k g_k(s_k) + sum_e D^e(s_from, s_to) with the pieces
  // anchored at the all-zeros profile; |G| <= |base| + sum max|g_k| + sum max|D^e|.
  double base = 0.0;
  for (const Matrix& me : m) base += me(0, 0);
  std::vector<std::vector<double>> gk(static_cast<std::size_t>(g.num_agents()));
  for (int k = 0; k < g.num_agents(); ++k)
    gk[k].assign(static_cast<std::size_t>(g.actions(k)), 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Matrix& me = m[e];
    for (std::size_t i = 0; i < me.rows(); ++i) gk[edges[e].from][i] += me(i, 0) - me(0, 0);
    for (std::size_t j = 0; j < me.cols(); ++j) gk[edges[e].to][j] += me(0, j) - me(0, 0);
  }
  double bound = std::abs(base);
  for (const auto& v : gk) {
    double mx = 0.0;
    for (double t : v) mx = std::max(mx, std::abs(t));
    bound += mx;
  }
  for (const Matrix& me : m) {
    double mx = 0.0;
    for (std::size_t i = 0; i < me.rows(); ++i)
      for (std::size_t j = 0; j < me.cols(); ++j)
        mx = std::max(mx, std::abs(me(i, j) - me(i, 0) - me(0, j) + me(0, 0)));
    bound += mx;
  }
  return bound;
}

inline bool is_zero_sum(const NetworkGame& g, double tol = 1e-9) {
  return zero_sum_residual(g) <= tol;
}

// True when every edge's interaction sum A + B^T is a constant matrix; the
// per-edge constants (if requested) are the entry means.
inline bool is_pairwise_constant_sum(const NetworkGame& g, double tol = 1e-9,
                                     std::vector<double>* constants = nullptr) {
  if (constants) constants->clear();
  bool ok = true;
  for (const Edge& e : g.edges()) {
    const Matrix m = e.a + e.b.transpose();
    double mean = 0.0;
    for (double v : m.data()) mean += v;
    mean /= static_cast<double>(m.data().size());
    for (double v : m.data())
      if (std::abs(v - mean) > tol) ok = false;
    if (constants) constants->push_back(mean);
  }
  return ok;
}

}  // namespace polyq
