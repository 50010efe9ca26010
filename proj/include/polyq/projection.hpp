#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/game.hpp"
#include "polyq/matrix.hpp"
#include "polyq/mpd.hpp"

namespace polyq {

// Output of the nearest network zero-sum game computation: the projected
// game, the per-edge sum constants (aligned with projected.edges()), the
// squared Frobenius distance moved (both orientations), the Lagrange
// multiplier of the sum-to-zero constraint, and distance certificates
// between input and output.
struct ProjectionResult {
  NetworkGame projected;
  std::vector<double> constants;
  double objective = 0.0;
  double lambda = 0.0;
  MpdBound delta_abs;
  MpdBound delta_2norm;
};

// Projects onto the set of pairwise constant-sum games whose constants sum
// to zero. Minimizing sum_e ||Ahat-A||_F^2 + ||Bhat-B||_F^2 subject to
// Ahat_ij + Bhat_ji = c_e and sum_e c_e = 0 separates: given c the optimal
// move splits the violation (c_e - s_ij)/2 evenly between the two sides,
// where s_ij = A_ij + B_ji; the reduced problem in c is a quadratic with one
// linear constraint whose multiplier is
//   lambda = (sum_e S_e/m_e) / (sum_e 1/m_e),  c_e = (S_e - lambda)/m_e,
// with S_e the entry sum of s and m_e the entry count. The objective is then
// sum_e sum_ij (c_e - s_ij)^2 / 2.
inline ProjectionResult nearest_nzsg(const NetworkGame& game) {
  const auto& edges = game.edges();
  std::vector<Matrix> s;
  s.reserve(edges.size());
  std::vector<double> entry_sum(edges.size(), 0.0);
  double lambda_num = 0.0, lambda_den = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    Matrix se = edges[e].a + edges[e].b.transpose();
    for (double v : se.data()) entry_sum[e] += v;
    const double m = static_cast<double>(se.rows() * se.cols());
    lambda_num += entry_sum[e] / m;
    lambda_den += 1.0 / m;
    s.push_back(std::move(se));
  }
  const double lambda = lambda_den > 0.0 ? lambda_num / lambda_den : 0.0;

  std::vector<Edge> projected_edges = edges;
  std::vector<double> constants(edges.size(), 0.0);
  double objective = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double m = static_cast<double>(s[e].rows() * s[e].cols());
    const double c = (entry_sum[e] - lambda) / m;
    constants[e] = c;
    Edge& pe = projected_edges[e];
    for (std::size_t i = 0; i < s[e].rows(); ++i) {
      for (std::size_t j = 0; j < s[e].cols(); ++j) {
        const double gap = c - s[e](i, j);
        pe.a(i, j) += gap / 2.0;
        pe.b(j, i) += gap / 2.0;
        objective += gap * gap / 2.0;
      }
    }
  }
  NetworkGame projected(game.action_counts(), std::move(projected_edges));
  MpdBound d_abs = mpd_bound_abs(game, projected);
  MpdBound d_2 = mpd_bound_2norm(game, projected);
  return ProjectionResult{std::move(projected), std::move(constants), objective, lambda,
                          d_abs, d_2};
}

// First-order optimality check for a claimed projection: feasibility of both
// constraint families, the even-split stationarity condition on the moves,
// and agreement of the per-edge multiplier S_e - m_e c_e across edges. For a
// strictly convex quadratic over an affine set these conditions characterize
// the minimizer, so the residual vanishes (up to rounding) exactly at the
// true projection.
inline double kkt_residual(const NetworkGame& game, const ProjectionResult& result) {
  require_same_structure(game, result.projected);
  if (result.constants.size() != game.edges().size())
    throw invalid_input("constants do not align with the edge list");
  double res = 0.0;
  double csum = 0.0;
  double sigma_min = std::numeric_limits<double>::infinity();
  double sigma_max = -std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < game.edges().size(); ++e) {
    const Edge& in = game.edges()[e];
    const Edge& out = result.projected.edges()[e];
    const double c = result.constants[e];
    csum += c;
    double sigma = 0.0;
    for (std::size_t i = 0; i < in.a.rows(); ++i) {
      for (std::size_t j = 0; j < in.a.cols(); ++j) {
        const double wa = out.a(i, j) - in.a(i, j);
        const double wb = out.b(j, i) - in.b(j, i);
        res = std::max(res, std::abs(out.a(i, j) + out.b(j, i) - c));
        res = std::max(res, std::abs(wa - wb));
        sigma += wa;
      }
    }
    sigma_min = std::min(sigma_min, sigma);
    sigma_max = std::max(sigma_max, sigma);
  }
  res = std::max(res, std::abs(csum));
  if (!game.edges().empty()) res = std::max(res, sigma_max - sigma_min);
  return res;
}

// A zero-sum game rewritten as an explicitly pairwise constant-sum game with
// constants summing to zero, leaving every agent's payoff function
// untouched. Exists by the structure zero-sum enforces on the edge sums
// s_ij = A_ij + B_ji: each is additively separable (s_ij = phi_i + psi_j)
// and each agent's separable parts sum to a constant across its edges.
struct ConstantSumDecomposition {
  NetworkGame game;
  std::vector<double> constants;
  // How far the input was from exactly satisfying the structure the
  // rewrite assumes; rounding-level for exactly zero-sum inputs.
  double separability_residual = 0.0;
};

// The rewrite applies, per directed edge (k,l), the row shift
//   Ahat^{kl}_ij = A^{kl}_ij + gamma^{kl} - phi^{kl}_i.
// Any such shift keeps the edge sums constant in each index; it preserves
// payoffs exactly when each agent's shifts cancel across its edges,
// sum_l (gamma^{kl} - phi^{kl}_i) = 0 for every action i, which zero-sum
// makes possible because it forces sum_l phi^{kl}_i to be independent of i.
// Among admissible gammas the minimal total squared shift is attained at
// gamma^{kl} = mean_i phi^{kl}_i. The resulting edge sums are the constants
// c_e = gamma^{kl} + gamma^{lk} = mean of s^e, and sum_e c_e equals the
// total payoff at the uniform profile, which is zero for a zero-sum game.
inline ConstantSumDecomposition constant_sum_decompose(const NetworkGame& game_zs,
                                                       double zs_tol = 1e-8) {
  if (!is_zero_sum(game_zs, zs_tol))
    throw invalid_input("constant-sum decomposition requires a zero-sum game");
  const auto& edges = game_zs.edges();
  const int n_agents = game_zs.num_agents();

  // Symmetric separable split of each edge sum: phi from row means, psi from
  // column means, both centered by half the grand mean.
  std::vector<std::vector<double>> phi(edges.size()), psi(edges.size());
  double separability = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Matrix s = edges[e].a + edges[e].b.transpose();
    const double rows = static_cast<double>(s.rows());
    const double cols = static_cast<double>(s.cols());
    double grand = 0.0;
    phi[e].assign(s.rows(), 0.0);
    psi[e].assign(s.cols(), 0.0);
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j) {
        phi[e][i] += s(i, j) / cols;
        psi[e][j] += s(i, j) / rows;
        grand += s(i, j) / (rows * cols);
      }
    for (double& v : phi[e]) v -= grand / 2.0;
    for (double& v : psi[e]) v -= grand / 2.0;
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t j = 0; j < s.cols(); ++j)
        separability = std::max(separability, std::abs(s(i, j) - phi[e][i] - psi[e][j]));
  }

  // The smallest-norm admissible gamma is the unconstrained least-squares
  // choice gamma^{kl} = mean_i phi^{kl}_i, which meets each agent's
  // cancellation constraint automatically: summing it over an agent's edges
  // reproduces beta_k exactly because averaging over i commutes with the
  // edge sum. Apply the row shifts and read off the constants.
  std::vector<Edge> new_edges = edges;
  std::vector<double> constants(edges.size(), 0.0);
  for (int k = 0; k < n_agents; ++k) {
    for (const IncidentEdge& ie : game_zs.incident(k)) {
      const std::vector<double>& f = ie.forward ? phi[ie.edge_index] : psi[ie.edge_index];
      double gamma = 0.0;
      for (double v : f) gamma += v;
      gamma /= static_cast<double>(f.size());
      Matrix& block = ie.forward ? new_edges[ie.edge_index].a : new_edges[ie.edge_index].b;
      for (std::size_t i = 0; i < block.rows(); ++i) {
        const double shift = gamma - f[i];
        for (std::size_t j = 0; j < block.cols(); ++j) block(i, j) += shift;
      }
      constants[ie.edge_index] += gamma;
    }
  }
  return ConstantSumDecomposition{NetworkGame(game_zs.action_counts(), std::move(new_edges)),
                                  std::move(constants), separability};
}

}  // namespace polyq
