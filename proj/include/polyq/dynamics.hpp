#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/game.hpp"
#include "polyq/mpd.hpp"
#include "polyq/rates.hpp"

namespace polyq {

// D_KL(y ‖ x) for one distribution pair, with the 0 ln 0 = 0 convention and
// an infinite result when y puts mass where x has none.
inline double kl_divergence(const std::vector<double>& y, const std::vector<double>& x) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] <= 0.0) continue;
    if (x[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += y[i] * std::log(y[i] / x[i]);
  }
  return std::max(acc, 0.0);
}

// Joint divergence: additive across agents.
inline double kl_divergence(const JointStrategy& y, const JointStrategy& x) {
  if (y.num_agents() != x.num_agents()) throw invalid_input("strategy agent counts differ");
  double acc = 0.0;
  for (int k = 0; k < y.num_agents(); ++k) acc += kl_divergence(y.agent(k), x.agent(k));
  return acc;
}

inline void require_interior(const JointStrategy& x, const char* who) {
  if (!x.is_interior(kEpsFloor))
    throw boundary_error(std::string(who) + ": strategy touches the simplex boundary");
}

// Velocity of the smooth Q-learning flow at x:
//   dx_ki/dt = x_ki [ r_ki - <x_k, r_k> + T_k (sum_j x_kj ln x_kj - ln x_ki) ].
// Each agent's velocity sums to zero (tangent to the simplex).
inline std::vector<std::vector<double>> qld_vector_field(const NetworkGame& g,
                                                         const JointStrategy& x,
                                                         const ExplorationRates& rates) {
  require_matching(g, x);
  require_matching(g, rates);
  require_interior(x, "qld_vector_field");
  std::vector<std::vector<double>> v;
  v.reserve(static_cast<std::size_t>(g.num_agents()));
  for (int k = 0; k < g.num_agents(); ++k) {
    const std::vector<double> r = reward_vector(g, x, k);
    const std::vector<double>& xk = x.agent(k);
    double avg_r = 0.0, avg_lnx = 0.0;
    for (std::size_t i = 0; i < xk.size(); ++i) {
      avg_r += xk[i] * r[i];
      avg_lnx += xk[i] * std::log(xk[i]);
    }
    std::vector<double> vk(xk.size());
    const double temp = rates.at(k);
    for (std::size_t i = 0; i < xk.size(); ++i)
      vk[i] = xk[i] * (r[i] - avg_r + temp * (avg_lnx - std::log(xk[i])));
    v.push_back(std::move(vk));
  }
  return v;
}

inline double qld_field_sup_norm(const NetworkGame& g, const JointStrategy& x,
                                 const ExplorationRates& rates) {
  double m = 0.0;
  for (const auto& vk : qld_vector_field(g, x, rates))
    for (double t : vk) m = std::max(m, std::abs(t));
  return m;
}

// Fixed-step RK4 integrator for the Q-learning flow, run in centered logit
// coordinates z_ki = ln x_ki - mean_j ln x_kj. The flow there is
//   dz_ki/dt = r_ki(x(z)) - mean_j r_kj(x(z)) - T_k z_ki,
// which maps back through the softmax: positivity and normalization are
// exact by construction, so the boundary blow-up of the simplex form never
// enters the arithmetic. States are clamped to the probability floor only
// when exported.
class QldIntegrator {
 public:
  QldIntegrator(NetworkGame game, const JointStrategy& x0, ExplorationRates rates, double step)
      : game_(std::move(game)), rates_(std::move(rates)), step_(step) {
    require_matching(game_, x0);
    require_matching(game_, rates_);
    if (!(step_ > 0.0) || !std::isfinite(step_)) throw invalid_input("step must be positive");
    if (!x0.is_interior(kEpsFloor))
      throw boundary_error("integration requires an interior initial strategy");
    offsets_.reserve(static_cast<std::size_t>(game_.num_agents()) + 1);
    offsets_.push_back(0);
    for (int k = 0; k < game_.num_agents(); ++k)
      offsets_.push_back(offsets_.back() + game_.actions(k));
    z_.resize(static_cast<std::size_t>(offsets_.back()));
    for (int k = 0; k < game_.num_agents(); ++k) {
      const std::vector<double>& xk = x0.agent(k);
      for (std::size_t i = 0; i < xk.size(); ++i)
        z_[static_cast<std::size_t>(offsets_[k]) + i] = std::log(xk[i]);
    }
    recenter();
    x_buf_.resize(z_.size());
    r_buf_.resize(z_.size());
    k1_.resize(z_.size());
    k2_.resize(z_.size());
    k3_.resize(z_.size());
    k4_.resize(z_.size());
    ztmp_.resize(z_.size());
  }

  const NetworkGame& game() const { return game_; }
  const ExplorationRates& rates() const { return rates_; }
  double step_size() const { return step_; }
  double time() const { return static_cast<double>(steps_) * step_; }

  // Swap the payoff matrices mid-run (noise schedules); the state carries
  // over unchanged.
  void set_game(NetworkGame g) {
    require_same_structure(game_, g);
    game_ = std::move(g);
  }

  void step_once() {
    const double h = step_;
    field(z_, k1_);
    axpy(z_, 0.5 * h, k1_, ztmp_);
    field(ztmp_, k2_);
    axpy(z_, 0.5 * h, k2_, ztmp_);
    field(ztmp_, k3_);
    axpy(z_, h, k3_, ztmp_);
    field(ztmp_, k4_);
    for (std::size_t i = 0; i < z_.size(); ++i)
      z_[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    recenter();
    for (double v : z_)
      if (!std::isfinite(v))
        throw integration_error("state became non-finite during integration", time());
    ++steps_;
  }

  // Current mixed strategies: softmax of z, floored at kEpsFloor and
  // renormalized. The clamp happens only here, at the export boundary.
  JointStrategy state() const {
    std::vector<std::vector<double>> probs;
    probs.reserve(static_cast<std::size_t>(game_.num_agents()));
    for (int k = 0; k < game_.num_agents(); ++k) {
      const int n = game_.actions(k);
      std::vector<double> p(static_cast<std::size_t>(n));
      softmax_agent(z_, k, p.data());
      double sum = 0.0;
      for (double& v : p) {
        v = std::max(v, kEpsFloor);
        sum += v;
      }
      for (double& v : p) v /= sum;
      probs.push_back(std::move(p));
    }
    return JointStrategy(std::move(probs));
  }

 private:
  void recenter() {
    for (int k = 0; k < game_.num_agents(); ++k) {
      const std::size_t b = static_cast<std::size_t>(offsets_[k]);
      const std::size_t n = static_cast<std::size_t>(game_.actions(k));
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += z_[b + i];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) z_[b + i] -= mean;
    }
  }

  void softmax_agent(const std::vector<double>& z, int k, double* out) const {
    const std::size_t b = static_cast<std::size_t>(offsets_[k]);
    const std::size_t n = static_cast<std::size_t>(game_.actions(k));
    double zmax = z[b];
    for (std::size_t i = 1; i < n; ++i) zmax = std::max(zmax, z[b + i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::exp(z[b + i] - zmax);
      sum += out[i];
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
  }

  static void axpy(const std::vector<double>& z, double h, const std::vector<double>& k,
                   std::vector<double>& out) {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] + h * k[i];
  }

  void field(const std::vector<double>& z, std::vector<double>& out) {
    for (int k = 0; k < game_.num_agents(); ++k)
      softmax_agent(z, k, x_buf_.data() + offsets_[k]);
    std::fill(r_buf_.begin(), r_buf_.end(), 0.0);
    for (const Edge& e : game_.edges()) {
      const std::size_t bf = static_cast<std::size_t>(offsets_[e.from]);
      const std::size_t bt = static_cast<std::size_t>(offsets_[e.to]);
      const std::size_t nf = e.a.rows(), nt = e.a.cols();
      for (std::size_t i = 0; i < nf; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < nt; ++j) acc += e.a(i, j) * x_buf_[bt + j];
        r_buf_[bf + i] += acc;
      }
      for (std::size_t j = 0; j < nt; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < nf; ++i) acc += e.b(j, i) * x_buf_[bf + i];
        r_buf_[bt + j] += acc;
      }
    }
    for (int k = 0; k < game_.num_agents(); ++k) {
      const std::size_t b = static_cast<std::size_t>(offsets_[k]);
      const std::size_t n = static_cast<std::size_t>(game_.actions(k));
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += r_buf_[b + i];
      mean /= static_cast<double>(n);
      const double temp = rates_.at(k);
      for (std::size_t i = 0; i < n; ++i) out[b + i] = r_buf_[b + i] - mean - temp * z[b + i];
    }
  }

  NetworkGame game_;
  ExplorationRates rates_;
  double step_;
  long long steps_ = 0;
  std::vector<int> offsets_;
  std::vector<double> z_;
  std::vector<double> x_buf_, r_buf_, k1_, k2_, k3_, k4_, ztmp_;
};

// Reference point and radius against which a trajectory's divergence
// diagnostics are recorded.
struct DiagnosticsSpec {
  JointStrategy reference;
  double trap_radius = 0.0;
};

// Sampled flow with optional divergence diagnostics. Diagnostics are
// computed from the exported (clamped) states, so they can be recomputed
// from the record alone.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<JointStrategy> states;
  std::optional<JointStrategy> reference;
  double trap_radius = 0.0;
  std::vector<double> kl_p_x;            // D_KL(reference ‖ state)
  std::vector<double> kl_x_p;            // D_KL(state ‖ reference)
  std::vector<std::uint8_t> condition;   // trap_radius < kl_p_x + kl_x_p

  bool has_diagnostics() const { return reference.has_value(); }
};

inline TrajectoryRecord integrate(const NetworkGame& g, const JointStrategy& x0,
                                  const ExplorationRates& rates, double horizon, double step,
                                  const DiagnosticsSpec* diag = nullptr) {
  if (!(step > 0.0) || !std::isfinite(step)) throw invalid_input("step must be positive");
  if (!(horizon >= step) || !std::isfinite(horizon))
    throw invalid_input("horizon must be at least one step");
  QldIntegrator integ(g, x0, rates, step);
  const long long n_steps = std::llround(horizon / step);
  TrajectoryRecord rec;
  rec.times.reserve(static_cast<std::size_t>(n_steps) + 1);
  rec.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  if (diag) {
    rec.reference = diag->reference;
    rec.trap_radius = diag->trap_radius;
  }
  auto record = [&](double t) {
    rec.times.push_back(t);
    rec.states.push_back(integ.state());
    if (diag) {
      const double d_px = kl_divergence(*rec.reference, rec.states.back());
      const double d_xp = kl_divergence(rec.states.back(), *rec.reference);
      rec.kl_p_x.push_back(d_px);
      rec.kl_x_p.push_back(d_xp);
      rec.condition.push_back(rec.trap_radius < d_px + d_xp ? 1 : 0);
    }
  };
  record(0.0);
  for (long long i = 1; i <= n_steps; ++i) {
    integ.step_once();
    record(static_cast<double>(i) * step);
  }
  return rec;
}

struct QreOptions {
  double damping = 0.5;   // fixed-point mixing weight on the response map
  double tol = 1e-10;     // sup-norm residual target
  long max_iter = 100000; // total work budget (sweeps plus fallback steps)
  double ode_step = 0.01; // fallback integrator step
  double ode_block = 25.0;// time units integrated per fallback round
};

namespace detail {

inline void logit_response(const NetworkGame& g, const JointStrategy& x,
                           const ExplorationRates& rates,
                           std::vector<std::vector<double>>& out) {
  out.resize(static_cast<std::size_t>(g.num_agents()));
  for (int k = 0; k < g.num_agents(); ++k) {
    std::vector<double> r = reward_vector(g, x, k);
    const double temp = rates.at(k);
    double zmax = -std::numeric_limits<double>::infinity();
    for (double& v : r) {
      v /= temp;
      zmax = std::max(zmax, v);
    }
    double sum = 0.0;
    for (double& v : r) {
      v = std::exp(v - zmax);
      sum += v;
    }
    for (double& v : r) v /= sum;
    out[k] = std::move(r);
  }
}

}  // namespace detail

// Max deviation of x from its own softmax response; zero exactly at a
// quantal response equilibrium.
inline double qre_residual(const NetworkGame& g, const JointStrategy& x,
                           const ExplorationRates& rates) {
  std::vector<std::vector<double>> br;
  detail::logit_response(g, x, rates, br);
  double res = 0.0;
  for (int k = 0; k < g.num_agents(); ++k)
    for (std::size_t i = 0; i < br[k].size(); ++i)
      res = std::max(res, std::abs(x.agent(k)[i] - br[k][i]));
  return res;
}

// Damped fixed-point iteration on x <- (1-damping) x + damping softmax(r/T).
// The bare map only contracts once the temperatures dominate the reward
// spread, so the solve anneals a shared temperature multiplier down to 1,
// warm starting each stage at the previous stage's answer. A stalled final
// stage falls back to riding the flow, which is guaranteed convergent on
// network zero-sum games, where this solver is primarily used.
inline JointStrategy qre_solve(const NetworkGame& g, const ExplorationRates& rates,
                               const JointStrategy* init = nullptr, QreOptions opts = {}) {
  require_matching(g, rates);
  if (!(opts.damping > 0.0) || opts.damping > 1.0)
    throw invalid_input("damping must lie in (0, 1]");
  JointStrategy x = init ? *init : JointStrategy::uniform(g);
  require_matching(g, x);
  if (!x.is_interior(kEpsFloor))
    throw boundary_error("qre_solve requires an interior starting point");

  std::vector<std::vector<double>> br;
  long work = 0;
  const auto give_up = [&]() -> convergence_error {
    detail::logit_response(g, x, rates, br);
    double residual = 0.0;
    for (int k = 0; k < g.num_agents(); ++k)
      for (std::size_t i = 0; i < br[static_cast<std::size_t>(k)].size(); ++i)
        residual = std::max(
            residual, std::abs(x.agent(k)[i] - br[static_cast<std::size_t>(k)][i]));
    return convergence_error("quantal response solve exhausted its iteration budget",
                             residual);
  };
  const auto residual_at = [&](const ExplorationRates& stage) {
    detail::logit_response(g, x, stage, br);
    double residual = 0.0;
    for (int k = 0; k < g.num_agents(); ++k)
      for (std::size_t i = 0; i < br[static_cast<std::size_t>(k)].size(); ++i)
        residual = std::max(
            residual, std::abs(x.agent(k)[i] - br[static_cast<std::size_t>(k)][i]));
    return residual;
  };
  // One damped solve at fixed temperatures. Divergence rewinds to the best
  // iterate seen and halves the mixing weight; once that bottoms out, an
  // intermediate stage hands its best iterate onward while the final stage
  // rides the flow until the tolerance or the budget gives out. Returns
  // false only when the shared work budget runs out.
  const auto sweep = [&](const ExplorationRates& stage, double tol,
                         bool final_stage) -> bool {
    double mixing = opts.damping;
    double best = std::numeric_limits<double>::infinity();
    JointStrategy best_x = x;
    int stalled = 0;
    while (work < opts.max_iter) {
      const double residual = residual_at(stage);
      if (residual < tol) return true;
      if (residual < best * (1.0 - 1e-12)) {
        best = residual;
        best_x = x;
        stalled = 0;
      } else {
        ++stalled;
      }
      ++work;
      if (stalled >= 30) {
        x = best_x;
        mixing *= 0.5;
        best = std::numeric_limits<double>::infinity();
        stalled = 0;
        if (mixing >= opts.damping / 4096.0) continue;
        if (!final_stage) return true;
        // The damped map will not settle here; ride the flow the rest of
        // the way. Low temperature iterates can sit below the interior
        // floor, so restart from a lightly floored copy.
        std::vector<std::vector<double>> p = best_x.probs();
        for (auto& pk : p) {
          double sum = 0.0;
          for (double& v : pk) {
            v = std::max(v, 1e-9);
            sum += v;
          }
          for (double& v : pk) v /= sum;
        }
        QldIntegrator integ(g, JointStrategy(std::move(p)), stage, opts.ode_step);
        const long long block = std::llround(opts.ode_block / opts.ode_step);
        while (work < opts.max_iter) {
          for (long long i = 0; i < block && work < opts.max_iter; ++i, ++work)
            integ.step_once();
          x = integ.state();
          if (residual_at(stage) < tol) return true;
        }
        return false;
      }
      std::vector<std::vector<double>> next;
      next.reserve(br.size());
      for (int k = 0; k < g.num_agents(); ++k) {
        const auto& bk = br[static_cast<std::size_t>(k)];
        std::vector<double> nk(bk.size());
        for (std::size_t i = 0; i < nk.size(); ++i)
          nk[i] = (1.0 - mixing) * x.agent(k)[i] + mixing * bk[i];
        next.push_back(std::move(nk));
      }
      x = JointStrategy(std::move(next));
    }
    return false;
  };

  // Start where softmax(r / (m T)) is nearly uniform: m T has to dominate the
  // largest reward reach, the sum of max entries over an agent's edges.
  double start_mult = 1.0;
  for (int k = 0; k < g.num_agents(); ++k) {
    double reach = 0.0;
    for (const Edge& e : g.edges()) {
      if (e.from == k) reach += e.a.max_abs();
      if (e.to == k) reach += e.b.max_abs();
    }
    start_mult = std::max(start_mult, 4.0 * reach / rates.at(k));
  }
  for (double mult = start_mult; mult > 1.0; mult *= 0.7) {
    std::vector<double> temps(static_cast<std::size_t>(g.num_agents()));
    for (int k = 0; k < g.num_agents(); ++k)
      temps[static_cast<std::size_t>(k)] = rates.at(k) * mult;
    if (!sweep(ExplorationRates(std::move(temps)), 1e-8, false)) throw give_up();
  }
  if (!sweep(rates, opts.tol, true)) throw give_up();
  return x;
}

// The KL sublevel set that asymptotically contains trajectories of any game
// within distance delta of the zero-sum game: center at the QRE, radius
// N delta / T_min.
struct TrapRegion {
  JointStrategy qre;
  double radius = 0.0;
  MpdBound delta;
  ExplorationRates rates;
};

inline TrapRegion trap_region(const NetworkGame& game_zs, const MpdBound& delta,
                              const ExplorationRates& rates, double zs_tol = 1e-8,
                              const QreOptions& qre_opts = {}) {
  if (!(delta.value >= 0.0) || !std::isfinite(delta.value))
    throw invalid_input("distance certificate must be a finite nonnegative value");
  if (!is_zero_sum(game_zs, zs_tol))
    throw invalid_input("trap region is defined relative to a zero-sum game");
  JointStrategy p = qre_solve(game_zs, rates, nullptr, qre_opts);
  const double radius =
      static_cast<double>(game_zs.num_agents()) * delta.value / rates.t_min();
  return TrapRegion{std::move(p), radius, delta, rates};
}

inline TrapRegion trap_region(const NetworkGame& game_zs, double delta,
                              const ExplorationRates& rates, double zs_tol = 1e-8,
                              const QreOptions& qre_opts = {}) {
  return trap_region(game_zs, MpdBound{delta, MpdKind::exact}, rates, zs_tol, qre_opts);
}

// One evaluation of the divergence-decrease test at a state x:
//   lhs       = N delta / T_min
//   rhs       = D_KL(p‖x) + D_KL(x‖p)
//   condition = lhs < rhs  (x lies outside the symmetrized sublevel set)
// and the instantaneous derivative of D_KL(p‖x) along the flow of `game`,
//   d/dt D_KL(p‖x) = sum_k (x_k - p_k)^T [ r_k(x_{-k}) - T_k ln x_k ].
// When p is the QRE of a zero-sum game within distance delta of `game`,
// condition implies the derivative is negative.
struct LyapunovReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool condition = false;
  double kl_derivative = 0.0;
  bool decrease_observed = false;
};

inline LyapunovReport lyapunov_check(const NetworkGame& g, const JointStrategy& x,
                                     const JointStrategy& p, const ExplorationRates& rates,
                                     const MpdBound& delta) {
  require_matching(g, x);
  require_matching(g, p);
  require_matching(g, rates);
  require_interior(x, "lyapunov_check");
  LyapunovReport rep;
  rep.lhs = static_cast<double>(g.num_agents()) * delta.value / rates.t_min();
  rep.rhs = kl_divergence(p, x) + kl_divergence(x, p);
  rep.condition = rep.lhs < rep.rhs;
  double deriv = 0.0;
  for (int k = 0; k < g.num_agents(); ++k) {
    const std::vector<double> r = reward_vector(g, x, k);
    const std::vector<double>& xk = x.agent(k);
    const std::vector<double>& pk = p.agent(k);
    const double temp = rates.at(k);
    for (std::size_t i = 0; i < xk.size(); ++i)
      deriv += (xk[i] - pk[i]) * (r[i] - temp * std::log(xk[i]));
  }
  rep.kl_derivative = deriv;
  rep.decrease_observed = deriv < 0.0;
  return rep;
}

inline LyapunovReport lyapunov_check(const NetworkGame& g, const JointStrategy& x,
                                     const JointStrategy& p, const ExplorationRates& rates,
                                     double delta) {
  return lyapunov_check(g, x, p, rates, MpdBound{delta, MpdKind::exact});
}

// Largest D_KL(p ‖ x(t)) over the final fraction of a trajectory, compared
// against the region radius (with additive slack covering integration
// tolerance).
struct TailKl {
  double max_tail_kl = 0.0;
  bool within_bound = false;
};

inline TailKl asymptotic_kl(const TrajectoryRecord& traj, const TrapRegion& region,
                            double tail_fraction = 0.2, double slack = 1e-6) {
  if (traj.states.empty()) throw invalid_input("trajectory is empty");
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0)
    throw invalid_input("tail fraction must lie in (0, 1]");
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  const double threshold = t1 - tail_fraction * (t1 - t0) - 1e-12;
  TailKl out;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    if (traj.times[i] < threshold) continue;
    out.max_tail_kl = std::max(out.max_tail_kl, kl_divergence(region.qre, traj.states[i]));
  }
  out.within_bound = out.max_tail_kl <= region.radius + slack;
  return out;
}

// Discrete smoothed Q-update and its Boltzmann policy.
struct QState {
  std::vector<std::vector<double>> q;
  std::vector<double> alpha;  // per-agent learning rate in (0, 1]
};

inline std::vector<double> boltzmann_policy(const std::vector<double>& q, double temp) {
  if (!(temp > 0.0)) throw invalid_input("temperature must be positive");
  std::vector<double> p(q.size());
  double zmax = -std::numeric_limits<double>::infinity();
  for (double v : q) zmax = std::max(zmax, v / temp);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp(q[i] / temp - zmax);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

struct QStepResult {
  QState state;
  JointStrategy policy;
};

// Q_ki <- (1 - alpha_k) Q_ki + alpha_k r_ki(x_{-k}), with the induced policy
// read off the updated values.
inline QStepResult discrete_q_step(const NetworkGame& g, const QState& st,
                                   const ExplorationRates& rates,
                                   const JointStrategy& opponents) {
  require_matching(g, opponents);
  require_matching(g, rates);
  if (static_cast<int>(st.q.size()) != g.num_agents() ||
      static_cast<int>(st.alpha.size()) != g.num_agents())
    throw invalid_input("q-state has wrong agent count");
  QState next = st;
  std::vector<std::vector<double>> pol;
  pol.reserve(st.q.size());
  for (int k = 0; k < g.num_agents(); ++k) {
    if (static_cast<int>(st.q[k].size()) != g.actions(k))
      throw invalid_input("q-state has wrong action count for agent " + std::to_string(k));
    const double a = st.alpha[k];
    if (!(a > 0.0) || a > 1.0) throw invalid_input("learning rate must lie in (0, 1]");
    const std::vector<double> r = reward_vector(g, opponents, k);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(st.q[k][i])) throw invalid_input("q-values must be finite");
      next.q[k][i] = (1.0 - a) * st.q[k][i] + a * r[i];
    }
    pol.push_back(boltzmann_policy(next.q[k], rates.at(k)));
  }
  return QStepResult{std::move(next), JointStrategy(std::move(pol))};
}

}  // namespace polyq
