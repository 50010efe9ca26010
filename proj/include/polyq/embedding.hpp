#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/game.hpp"

namespace polyq {

// Two-dimensional slice through the joint-strategy space of a game where
// every agent has two actions: two base probability vectors are pulled back
// through the logit, combined linearly, and pushed forward through the
// sigmoid. (1,0) recovers u, (0,1) recovers v, (0,0) is uniform.
struct EmbeddingSpec {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> alphas;
  std::vector<double> betas;
};

namespace detail {

inline double stable_sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void require_open_unit(const std::vector<double>& u, const char* name) {
  if (u.empty()) throw invalid_input(std::string(name) + " must be nonempty");
  for (double t : u)
    if (!(t > 0.0) || !(t < 1.0))
      throw invalid_input(std::string(name) + " entries must lie strictly inside (0, 1)");
}

}  // namespace detail

inline JointStrategy embed_point(const std::vector<double>& u, const std::vector<double>& v,
                                 double alpha, double beta) {
  detail::require_open_unit(u, "u");
  detail::require_open_unit(v, "v");
  if (u.size() != v.size()) throw invalid_input("u and v must have equal length");
  std::vector<std::vector<double>> probs;
  probs.reserve(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double zu = std::log(u[k] / (1.0 - u[k]));
    const double zv = std::log(v[k] / (1.0 - v[k]));
    const double p = detail::stable_sigmoid(alpha * zu + beta * zv);
    probs.push_back({p, 1.0 - p});
  }
  return JointStrategy(std::move(probs));
}

// Grid evaluation, row-major over (alpha, beta).
inline std::vector<JointStrategy> logit_embedding(const EmbeddingSpec& spec) {
  detail::require_open_unit(spec.u, "u");
  detail::require_open_unit(spec.v, "v");
  if (spec.u.size() != spec.v.size()) throw invalid_input("u and v must have equal length");
  std::vector<JointStrategy> grid;
  grid.reserve(spec.alphas.size() * spec.betas.size());
  for (double a : spec.alphas)
    for (double b : spec.betas) grid.push_back(embed_point(spec.u, spec.v, a, b));
  return grid;
}

inline std::vector<double> grid_axis(double lo, double hi, int steps) {
  if (steps < 1) throw invalid_input("grid needs at least one step");
  std::vector<double> axis;
  axis.reserve(static_cast<std::size_t>(steps));
  if (steps == 1) {
    axis.push_back(lo);
    return axis;
  }
  for (int i = 0; i < steps; ++i)
    axis.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1));
  return axis;
}

}  // namespace polyq
