#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyq/dynamics.hpp"
#include "polyq/errors.hpp"
#include "polyq/game.hpp"
#include "polyq/generators.hpp"
#include "polyq/io.hpp"
#include "polyq/rng.hpp"

namespace polyq {

// Integration against a drifting game: every `period` steps the payoff
// matrices are redrawn as base + fresh bounded noise. Diagnostics are
// recorded against the base game's equilibrium, whose trap region is
// certified by the structural bound that holds for every game the schedule
// can produce.
struct NoisyRunResult {
  TrajectoryRecord trajectory;
  TrapRegion region;
  MpdBound certificate;
  double epsilon = 0.0;
  long long period = 1;
  std::uint64_t seed = 0;
};

inline NoisyRunResult noisy_run(const NetworkGame& base_zs, const ExplorationRates& rates,
                                double epsilon, long long period, double horizon, double step,
                                std::uint64_t seed, const JointStrategy* x0 = nullptr,
                                const QreOptions& qre_opts = {}) {
  if (period < 1) throw invalid_input("noise period must be at least one step");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw invalid_input("noise magnitude must be nonnegative");
  if (!(step > 0.0) || !std::isfinite(step)) throw invalid_input("step must be positive");
  if (!(horizon >= step) || !std::isfinite(horizon))
    throw invalid_input("horizon must be at least one step");
  const MpdBound cert{structural_delta_abs(base_zs, epsilon), MpdKind::abs_entry_bound};
  TrapRegion region = trap_region(base_zs, cert, rates, 1e-8, qre_opts);
  const JointStrategy start = x0 ? *x0 : JointStrategy::uniform(base_zs);
  QldIntegrator integ(base_zs, start, rates, step);
  Rng rng(seed);
  const long long n_steps = std::llround(horizon / step);

  TrajectoryRecord rec;
  rec.reference = region.qre;
  rec.trap_radius = region.radius;
  rec.times.reserve(static_cast<std::size_t>(n_steps) + 1);
  rec.states.reserve(static_cast<std::size_t>(n_steps) + 1);
  auto record = [&](double t) {
    rec.times.push_back(t);
    rec.states.push_back(integ.state());
    const double d_px = kl_divergence(*rec.reference, rec.states.back());
    const double d_xp = kl_divergence(rec.states.back(), *rec.reference);
    rec.kl_p_x.push_back(d_px);
    rec.kl_x_p.push_back(d_xp);
    rec.condition.push_back(rec.trap_radius < d_px + d_xp ? 1 : 0);
  };
  record(0.0);
  for (long long i = 0; i < n_steps; ++i) {
    if (i % period == 0) integ.set_game(detail::add_entry_noise(base_zs, epsilon, rng));
    integ.step_once();
    record(static_cast<double>(i + 1) * step);
  }
  return NoisyRunResult{std::move(rec), std::move(region), cert, epsilon, period, seed};
}

// A batch of seeded perturb-and-integrate runs from one generated base game,
// persisted with manifests and summary statistics.
struct CampaignSpec {
  std::string name = "campaign";
  GeneratorSpec generator;
  int runs = 1;
  std::optional<double> epsilon;       // noise magnitude, or
  std::optional<double> target_delta;  // inverted through the structural bound
  std::vector<double> temperatures = {0.75};
  double step = 0.01;
  double horizon = 500.0;
  double tail_fraction = 0.2;
  std::string x0_policy = "uniform";  // uniform | random
  std::uint64_t seed = 0;
  std::size_t stride = 10;
};

inline json campaign_spec_to_json(const CampaignSpec& s) {
  json j;
  j["name"] = s.name;
  j["generator"] = generator_spec_to_json(s.generator);
  j["runs"] = s.runs;
  if (s.epsilon) j["epsilon"] = *s.epsilon;
  if (s.target_delta) j["target_delta"] = *s.target_delta;
  j["temperatures"] = s.temperatures;
  j["step"] = s.step;
  j["horizon"] = s.horizon;
  j["tail_fraction"] = s.tail_fraction;
  j["x0_policy"] = s.x0_policy;
  j["seed"] = s.seed;
  j["stride"] = s.stride;
  return j;
}

inline CampaignSpec campaign_spec_from_json(const json& j) {
  try {
    CampaignSpec s;
    s.name = j.value("name", s.name);
    if (j.contains("generator")) s.generator = generator_spec_from_json(j["generator"]);
    s.runs = j.value("runs", s.runs);
    if (j.contains("epsilon")) s.epsilon = j["epsilon"].get<double>();
    if (j.contains("target_delta")) s.target_delta = j["target_delta"].get<double>();
    if (j.contains("temperatures")) {
      if (j["temperatures"].is_array())
        s.temperatures = j["temperatures"].get<std::vector<double>>();
      else
        s.temperatures = {j["temperatures"].get<double>()};
    }
    s.step = j.value("step", s.step);
    s.horizon = j.value("horizon", s.horizon);
    s.tail_fraction = j.value("tail_fraction", s.tail_fraction);
    s.x0_policy = j.value("x0_policy", s.x0_policy);
    s.seed = j.value("seed", s.seed);
    s.stride = j.value("stride", s.stride);
    return s;
  } catch (const json::exception& ex) {
    throw invalid_input(std::string("malformed campaign spec: ") + ex.what());
  }
}

inline ExplorationRates broadcast_rates(const std::vector<double>& temps, int agents) {
  if (temps.size() == 1) return ExplorationRates::constant(temps[0], agents);
  if (static_cast<int>(temps.size()) == agents) return ExplorationRates(temps);
  throw invalid_input("temperature list must have one entry or one per agent");
}

struct CampaignRunOutcome {
  int run = 0;
  bool ok = false;
  double delta = 0.0;
  double radius = 0.0;
  double max_tail_kl = 0.0;
  bool within_bound = false;
  std::string error;
};

struct CampaignResult {
  std::filesystem::path dir;
  int failures = 0;
  std::vector<CampaignRunOutcome> outcomes;
};

namespace detail {

inline double quantile_type7(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline CampaignResult run_campaign(const CampaignSpec& spec,
                                   const std::filesystem::path& out_dir) {
  if (spec.runs < 1) throw invalid_input("campaign needs at least one run");
  if (!(spec.tail_fraction > 0.0) || spec.tail_fraction > 1.0)
    throw invalid_input("tail fraction must lie in (0, 1]");
  if (spec.x0_policy != "uniform" && spec.x0_policy != "random")
    throw invalid_input("x0 policy must be uniform or random");
  const NetworkGame base = generate_game(spec.generator);
  if (!is_zero_sum(base, 1e-8))
    throw invalid_input("campaign base game must be zero-sum (generator kind nzsg_random)");
  const ExplorationRates rates = broadcast_rates(spec.temperatures, base.num_agents());
  double eps = 0.0;
  if (spec.epsilon && spec.target_delta)
    throw invalid_input("give either a noise magnitude or a target distance, not both");
  if (spec.epsilon)
    eps = *spec.epsilon;
  else if (spec.target_delta)
    eps = epsilon_for_delta_abs(base, *spec.target_delta);
  if (!(eps >= 0.0)) throw invalid_input("noise magnitude must be nonnegative");

  std::filesystem::create_directories(out_dir);
  write_game(out_dir / "base_game.json", base);
  const JointStrategy qre = qre_solve(base, rates);
  write_json_file(out_dir / "qre.json", strategy_to_json(qre));
  const std::string base_hash = file_hash(out_dir / "base_game.json");

  CampaignResult result;
  result.dir = out_dir;
  std::vector<std::vector<double>> finals(static_cast<std::size_t>(base.num_agents()));
  for (int m = 0; m < spec.runs; ++m) {
    const std::uint64_t run_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(m));
    CampaignRunOutcome outcome;
    outcome.run = m;
    char dirname[32];
    std::snprintf(dirname, sizeof(dirname), "run_%04d", m);
    const std::filesystem::path run_dir = out_dir / "runs" / dirname;
    try {
      const PerturbedGame pg = perturb_game(base, eps, derive_seed(run_seed, 0));
      const MpdBound delta = mpd_bound_abs(base, pg.game);
      TrapRegion region{qre,
                        static_cast<double>(base.num_agents()) * delta.value / rates.t_min(),
                        delta, rates};
      const JointStrategy x0 =
          spec.x0_policy == "uniform"
              ? JointStrategy::uniform(base)
              : random_logit_strategy(base.action_counts(), derive_seed(run_seed, 1));
      DiagnosticsSpec diag{qre, region.radius};
      const TrajectoryRecord traj =
          integrate(pg.game, x0, rates, spec.horizon, spec.step, &diag);
      const TailKl tail = asymptotic_kl(traj, region, spec.tail_fraction);

      write_game(run_dir / "game.json", pg.game);
      write_trajectory_csv(traj, run_dir / "trajectory.csv", spec.stride);
      json manifest;
      manifest["run"] = m;
      manifest["seed"] = run_seed;
      manifest["epsilon"] = eps;
      manifest["delta"] = {{"value", delta.value}, {"kind", to_string(delta.kind)}};
      manifest["delta_structural"] = pg.certificate.value;
      manifest["trap_radius"] = region.radius;
      manifest["temperatures"] = rates.values();
      manifest["step"] = spec.step;
      manifest["horizon"] = spec.horizon;
      manifest["tail_fraction"] = spec.tail_fraction;
      manifest["max_tail_kl"] = tail.max_tail_kl;
      manifest["within_bound"] = tail.within_bound;
      manifest["base_game_hash"] = base_hash;
      manifest["game_hash"] = file_hash(run_dir / "game.json");
      write_json_file(run_dir / "manifest.json", manifest);

      const JointStrategy& fin = traj.states.back();
      for (int k = 0; k < base.num_agents(); ++k) finals[k].push_back(fin.agent(k)[0]);
      outcome.ok = true;
      outcome.delta = delta.value;
      outcome.radius = region.radius;
      outcome.max_tail_kl = tail.max_tail_kl;
      outcome.within_bound = tail.within_bound;
    } catch (const std::exception& ex) {
      outcome.ok = false;
      outcome.error = ex.what();
      ++result.failures;
    }
    result.outcomes.push_back(std::move(outcome));
  }

  // Box-plot feed: spread of the final first-action probabilities per agent,
  // with the equilibrium value alongside.
  std::ostringstream csv;
  csv << "agent,qre_first_action,min,q1,median,q3,max\n";
  json jagents = json::array();
  for (int k = 0; k < base.num_agents(); ++k) {
    std::vector<double> v = finals[k];
    std::sort(v.begin(), v.end());
    const double q0 = v.empty() ? std::numeric_limits<double>::quiet_NaN() : v.front();
    const double q1 = detail::quantile_type7(v, 0.25);
    const double q2 = detail::quantile_type7(v, 0.5);
    const double q3 = detail::quantile_type7(v, 0.75);
    const double q4 = v.empty() ? std::numeric_limits<double>::quiet_NaN() : v.back();
    csv << k << ',' << format_double(qre.agent(k)[0]) << ',' << format_double(q0) << ','
        << format_double(q1) << ',' << format_double(q2) << ',' << format_double(q3) << ','
        << format_double(q4) << '\n';
    json ja;
    ja["agent"] = k;
    ja["qre_first_action"] = qre.agent(k)[0];
    ja["min"] = q0;
    ja["q1"] = q1;
    ja["median"] = q2;
    ja["q3"] = q3;
    ja["max"] = q4;
    jagents.push_back(std::move(ja));
  }
  write_text_file(out_dir / "summary.csv", csv.str());

  json jsummary;
  jsummary["agents"] = std::move(jagents);
  jsummary["failures"] = result.failures;
  jsummary["completed"] = spec.runs - result.failures;
  write_json_file(out_dir / "summary.json", jsummary);

  json jmanifest;
  jmanifest["name"] = spec.name;
  jmanifest["spec"] = campaign_spec_to_json(spec);
  jmanifest["epsilon_resolved"] = eps;
  jmanifest["base_game_hash"] = base_hash;
  jmanifest["failures"] = result.failures;
  json jruns = json::array();
  for (const CampaignRunOutcome& o : result.outcomes) {
    json jo;
    jo["run"] = o.run;
    jo["ok"] = o.ok;
    if (o.ok) {
      jo["delta"] = o.delta;
      jo["trap_radius"] = o.radius;
      jo["max_tail_kl"] = o.max_tail_kl;
      jo["within_bound"] = o.within_bound;
    } else {
      jo["error"] = o.error;
    }
    jruns.push_back(std::move(jo));
  }
  jmanifest["runs"] = std::move(jruns);
  write_json_file(out_dir / "campaign_manifest.json", jmanifest);
  return result;
}

}  // namespace polyq
