// Command line front end: game generation, perturbation, projection,
// distance certificates, fixed points, trajectory simulation, noisy
// simulation, strategy-plane embedding, and batch campaigns.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyq/polyq.hpp"

namespace {

using polyq::json;

struct ReferenceInfo {
  std::optional<polyq::JointStrategy> anchor;
  polyq::MpdBound delta;
  double radius = 0.0;
  std::string source;  // self | projection | none
};

// Anchor for diagnostics: the game's own fixed point when it is zero-sum,
// otherwise the fixed point of its nearest zero-sum neighbor with the exact
// distance between the two as the certificate.
ReferenceInfo resolve_reference(const polyq::NetworkGame& g, const polyq::ExplorationRates& rates,
                                const std::string& mode) {
  ReferenceInfo info;
  if (mode == "none") {
    info.source = "none";
    return info;
  }
  if (mode != "auto") throw polyq::invalid_input("--ref must be auto or none");
  if (polyq::is_zero_sum(g, 1e-8)) {
    info.anchor = polyq::qre_solve(g, rates);
    info.delta = polyq::MpdBound{0.0, polyq::MpdKind::exact};
    info.source = "self";
  } else {
    polyq::ProjectionResult proj = polyq::nearest_nzsg(g);
    info.anchor = polyq::qre_solve(proj.projected, rates);
    info.delta = polyq::mpd_exact(g, proj.projected);
    info.source = "projection";
  }
  info.radius = static_cast<double>(g.num_agents()) * info.delta.value / rates.t_min();
  return info;
}

json bound_to_json(const polyq::MpdBound& b) {
  return json{{"value", b.value}, {"kind", polyq::to_string(b.kind)}};
}

json tail_to_json(const polyq::TailKl& t) {
  return json{{"max_tail_kl", t.max_tail_kl}, {"within_bound", t.within_bound}};
}

polyq::JointStrategy starting_point(const polyq::NetworkGame& g, const std::string& policy,
                                    std::uint64_t seed, double sigma) {
  if (policy == "uniform") return polyq::JointStrategy::uniform(g);
  if (policy == "random") return polyq::random_logit_strategy(g.action_counts(), seed, sigma);
  throw polyq::invalid_input("--x0 must be uniform or random");
}

struct GenerateArgs {
  polyq::GeneratorSpec spec;
  std::string preset;
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  polyq::NetworkGame g = a.preset.empty() ? polyq::generate_game(a.spec)
                         : a.preset == "triangle"
                             ? polyq::conflict_triangle_preset()
                             : throw polyq::invalid_input("unknown preset: " + a.preset);
  polyq::write_game(a.out, g);
  json manifest;
  if (a.preset.empty())
    manifest["spec"] = polyq::generator_spec_to_json(a.spec);
  else
    manifest["preset"] = a.preset;
  manifest["agents"] = g.action_counts();
  manifest["edges"] = g.edges().size();
  manifest["zero_sum_residual"] = polyq::zero_sum_residual(g);
  manifest["game_hash"] = polyq::file_hash(a.out);
  polyq::write_json_file(a.out + ".manifest.json", manifest);
  return 0;
}

struct PerturbArgs {
  std::string game;
  std::optional<double> epsilon;
  std::optional<double> target_delta;
  std::uint64_t seed = 0;
  std::string out;
  std::string cert;
};

int run_perturb(const PerturbArgs& a) {
  polyq::NetworkGame g = polyq::read_game(a.game);
  if (a.epsilon.has_value() == a.target_delta.has_value())
    throw polyq::invalid_input("give exactly one of --epsilon and --target-delta");
  const double eps =
      a.epsilon ? *a.epsilon : polyq::epsilon_for_delta_abs(g, *a.target_delta);
  polyq::PerturbedGame pg = polyq::perturb_game(g, eps, a.seed);
  polyq::write_game(a.out, pg.game);
  if (!a.cert.empty()) {
    polyq::MpdBound exact = polyq::mpd_exact(g, pg.game);
    json cert;
    cert["epsilon"] = pg.epsilon;
    cert["delta_structural"] = pg.certificate.value;
    cert["delta_abs"] = polyq::mpd_bound_abs(g, pg.game).value;
    cert["delta_2norm"] = polyq::mpd_bound_2norm(g, pg.game).value;
    cert["delta_exact"] = exact.value;
    cert["exact_kind"] = polyq::to_string(exact.kind);
    polyq::write_json_file(a.cert, cert);
  }
  return 0;
}

struct ProjectArgs {
  std::string game;
  std::string out;
  std::string cert;
};

int run_project(const ProjectArgs& a) {
  polyq::NetworkGame g = polyq::read_game(a.game);
  polyq::ProjectionResult res = polyq::nearest_nzsg(g);
  polyq::write_game(a.out, res.projected);
  if (!a.cert.empty()) {
    json cert;
    cert["objective"] = res.objective;
    cert["lambda"] = res.lambda;
    json constants = json::array();
    for (std::size_t e = 0; e < res.constants.size(); ++e)
      constants.push_back(json{{"from", g.edges()[e].from},
                               {"to", g.edges()[e].to},
                               {"c", res.constants[e]}});
    cert["constants"] = std::move(constants);
    cert["delta_abs"] = res.delta_abs.value;
    cert["delta_2norm"] = res.delta_2norm.value;
    cert["zero_sum_residual"] = polyq::zero_sum_residual(res.projected);
    polyq::write_json_file(a.cert, cert);
  }
  return 0;
}

struct MpdArgs {
  std::string game;
  std::string other;
  std::string out;
};

int run_mpd(const MpdArgs& a) {
  polyq::NetworkGame g1 = polyq::read_game(a.game);
  polyq::NetworkGame g2 = polyq::read_game(a.other);
  const polyq::MpdBound exact = polyq::mpd_exact(g1, g2);
  const polyq::MpdBound abs_b = polyq::mpd_bound_abs(g1, g2);
  const polyq::MpdBound norm_b = polyq::mpd_bound_2norm(g1, g2);
  std::printf("exact %s %s\n", polyq::format_double(exact.value).c_str(),
              polyq::to_string(exact.kind));
  std::printf("delta_abs %s\n", polyq::format_double(abs_b.value).c_str());
  std::printf("delta_2norm %s\n", polyq::format_double(norm_b.value).c_str());
  if (!a.out.empty()) {
    json j;
    j["exact"] = bound_to_json(exact);
    j["delta_abs"] = abs_b.value;
    j["delta_2norm"] = norm_b.value;
    polyq::write_json_file(a.out, j);
  }
  return 0;
}

struct QreArgs {
  std::string game;
  std::vector<double> temps{0.75};
  double damping = 0.5;
  double tol = 1e-10;
  long long max_iter = 100000;
  std::string out;
};

int run_qre(const QreArgs& a) {
  polyq::NetworkGame g = polyq::read_game(a.game);
  polyq::ExplorationRates rates = polyq::broadcast_rates(a.temps, g.num_agents());
  polyq::QreOptions opts;
  opts.damping = a.damping;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  polyq::JointStrategy p = polyq::qre_solve(g, rates, nullptr, opts);
  json j;
  j["strategy"] = polyq::strategy_to_json(p);
  j["residual"] = polyq::qre_residual(g, p, rates);
  j["nash_gap"] = polyq::approximate_nash_gap(g, p).max_gap;
  j["temperatures"] = rates.values();
  if (a.out.empty())
    std::printf("%s\n", j.dump(2).c_str());
  else
    polyq::write_json_file(a.out, j);
  return 0;
}

struct SimulateArgs {
  std::string game;
  std::vector<double> temps{0.75};
  double horizon = 500.0;
  double step = 0.01;
  std::string x0 = "uniform";
  std::uint64_t x0_seed = 0;
  double x0_sigma = 1.0;
  std::string ref = "auto";
  std::size_t stride = 10;
  double tail_fraction = 0.2;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  polyq::NetworkGame g = polyq::read_game(a.game);
  polyq::ExplorationRates rates = polyq::broadcast_rates(a.temps, g.num_agents());
  ReferenceInfo ref = resolve_reference(g, rates, a.ref);
  polyq::JointStrategy x0 = starting_point(g, a.x0, a.x0_seed, a.x0_sigma);
  polyq::TrajectoryRecord rec;
  if (ref.anchor) {
    polyq::DiagnosticsSpec diag{*ref.anchor, ref.radius};
    rec = polyq::integrate(g, x0, rates, a.horizon, a.step, &diag);
  } else {
    rec = polyq::integrate(g, x0, rates, a.horizon, a.step);
  }
  const std::filesystem::path dir(a.out);
  polyq::write_trajectory_csv(rec, dir / "trajectory.csv", a.stride);
  json manifest;
  manifest["game_file"] = std::filesystem::path(a.game).filename().string();
  manifest["game_hash"] = polyq::file_hash(a.game);
  manifest["temperatures"] = rates.values();
  manifest["step"] = a.step;
  manifest["horizon"] = a.horizon;
  manifest["x0"] = a.x0;
  manifest["x0_seed"] = a.x0_seed;
  manifest["stride"] = a.stride;
  manifest["reference"] = ref.source;
  if (ref.anchor) {
    manifest["delta"] = bound_to_json(ref.delta);
    manifest["trap_radius"] = ref.radius;
    manifest["qre"] = polyq::strategy_to_json(*ref.anchor);
    polyq::TrapRegion region{*ref.anchor, ref.radius, ref.delta, rates};
    manifest["tail"] = tail_to_json(polyq::asymptotic_kl(rec, region, a.tail_fraction));
    manifest["tail_fraction"] = a.tail_fraction;
  }
  manifest["final_state"] = polyq::strategy_to_json(rec.states.back());
  polyq::write_json_file(dir / "manifest.json", manifest);
  return 0;
}

struct NoisySimArgs {
  std::string game;
  std::vector<double> temps{0.75};
  std::optional<double> epsilon;
  std::optional<double> target_delta;
  long long period = 50;
  double horizon = 500.0;
  double step = 0.01;
  std::uint64_t seed = 0;
  std::string x0 = "uniform";
  std::uint64_t x0_seed = 0;
  double x0_sigma = 1.0;
  std::size_t stride = 10;
  double tail_fraction = 0.2;
  std::string out;
};

int run_noisy_sim(const NoisySimArgs& a) {
  polyq::NetworkGame g = polyq::read_game(a.game);
  polyq::ExplorationRates rates = polyq::broadcast_rates(a.temps, g.num_agents());
  if (a.epsilon.has_value() == a.target_delta.has_value())
    throw polyq::invalid_input("give exactly one of --epsilon and --target-delta");
  const double eps =
      a.epsilon ? *a.epsilon : polyq::epsilon_for_delta_abs(g, *a.target_delta);
  polyq::JointStrategy x0 = starting_point(g, a.x0, a.x0_seed, a.x0_sigma);
  polyq::NoisyRunResult res =
      polyq::noisy_run(g, rates, eps, a.period, a.horizon, a.step, a.seed, &x0);
  const std::filesystem::path dir(a.out);
  polyq::write_trajectory_csv(res.trajectory, dir / "trajectory.csv", a.stride);
  polyq::TailKl tail = polyq::asymptotic_kl(res.trajectory, res.region, a.tail_fraction);
  json manifest;
  manifest["game_file"] = std::filesystem::path(a.game).filename().string();
  manifest["game_hash"] = polyq::file_hash(a.game);
  manifest["temperatures"] = rates.values();
  manifest["step"] = a.step;
  manifest["horizon"] = a.horizon;
  manifest["seed"] = a.seed;
  manifest["epsilon"] = res.epsilon;
  manifest["period"] = res.period;
  manifest["x0"] = a.x0;
  manifest["x0_seed"] = a.x0_seed;
  manifest["stride"] = a.stride;
  manifest["delta"] = bound_to_json(res.certificate);
  manifest["trap_radius"] = res.region.radius;
  manifest["qre"] = polyq::strategy_to_json(res.region.qre);
  manifest["tail"] = tail_to_json(tail);
  manifest["tail_fraction"] = a.tail_fraction;
  manifest["final_state"] = polyq::strategy_to_json(res.trajectory.states.back());
  polyq::write_json_file(dir / "manifest.json", manifest);
  return 0;
}

struct EmbedArgs {
  std::string game;
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> temps{0.75};
  double alpha_lo = -5.0, alpha_hi = 5.0;
  double beta_lo = -5.0, beta_hi = 5.0;
  int alpha_steps = 21, beta_steps = 21;
  std::string ref = "auto";
  std::string out;
};

int run_embed(const EmbedArgs& a) {
  polyq::NetworkGame g = polyq::read_game(a.game);
  for (int k = 0; k < g.num_agents(); ++k)
    if (g.actions(k) != 2)
      throw polyq::invalid_input("the strategy plane embedding needs two actions per agent");
  polyq::ExplorationRates rates = polyq::broadcast_rates(a.temps, g.num_agents());
  polyq::EmbeddingSpec spec;
  spec.u = a.u;
  spec.v = a.v;
  spec.alphas = polyq::grid_axis(a.alpha_lo, a.alpha_hi, a.alpha_steps);
  spec.betas = polyq::grid_axis(a.beta_lo, a.beta_hi, a.beta_steps);
  if (static_cast<int>(spec.u.size()) != g.num_agents() ||
      static_cast<int>(spec.v.size()) != g.num_agents())
    throw polyq::invalid_input("--u and --v need one entry per agent");
  ReferenceInfo ref = resolve_reference(g, rates, a.ref);
  if (!ref.anchor) throw polyq::invalid_input("the embedding map needs a reference anchor");
  const std::vector<polyq::JointStrategy> grid = polyq::logit_embedding(spec);
  std::ostringstream csv;
  csv << "alpha,beta,kl_p_x,kl_x_p\n";
  std::size_t idx = 0;
  for (double alpha : spec.alphas)
    for (double beta : spec.betas) {
      const polyq::JointStrategy& x = grid[idx++];
      csv << polyq::format_double(alpha) << ',' << polyq::format_double(beta) << ','
          << polyq::format_double(polyq::kl_divergence(*ref.anchor, x)) << ','
          << polyq::format_double(polyq::kl_divergence(x, *ref.anchor)) << '\n';
    }
  const std::filesystem::path dir(a.out);
  polyq::write_text_file(dir / "embedding.csv", csv.str());
  json manifest;
  manifest["game_file"] = std::filesystem::path(a.game).filename().string();
  manifest["game_hash"] = polyq::file_hash(a.game);
  manifest["u"] = spec.u;
  manifest["v"] = spec.v;
  manifest["alphas"] = spec.alphas;
  manifest["betas"] = spec.betas;
  manifest["temperatures"] = rates.values();
  manifest["reference"] = ref.source;
  manifest["delta"] = bound_to_json(ref.delta);
  manifest["trap_radius"] = ref.radius;
  manifest["qre"] = polyq::strategy_to_json(*ref.anchor);
  polyq::write_json_file(dir / "manifest.json", manifest);
  return 0;
}

struct CampaignArgs {
  std::string spec;
  std::string out;
};

int run_campaign_cmd(const CampaignArgs& a) {
  polyq::CampaignSpec spec = polyq::campaign_spec_from_json(polyq::read_json_file(a.spec));
  polyq::CampaignResult res = polyq::run_campaign(spec, a.out);
  std::printf("campaign %s: %d/%d runs ok\n", spec.name.c_str(),
              static_cast<int>(res.outcomes.size()) - res.failures,
              static_cast<int>(res.outcomes.size()));
  return res.failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polymatrix Q-learning dynamics toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* c_gen = app.add_subcommand("generate", "generate a seeded game instance");
  c_gen->add_option("--kind", gen.spec.kind, "nzsg_random | conflict");
  c_gen->add_option("--graph", gen.spec.graph, "chain | complete | random");
  c_gen->add_option("--agents", gen.spec.agents, "number of agents");
  c_gen->add_option("--actions", gen.spec.actions, "action counts (one value broadcasts)");
  c_gen->add_option("--seed", gen.spec.seed, "generator seed");
  c_gen->add_option("--entry-lo", gen.spec.entry_lo, "payoff entry lower bound");
  c_gen->add_option("--entry-hi", gen.spec.entry_hi, "payoff entry upper bound");
  c_gen->add_option("--edge-prob", gen.spec.edge_prob, "edge keep probability (random graph)");
  c_gen->add_option("--preset", gen.preset, "named instance (triangle)");
  c_gen->add_option("--out", gen.out, "output game json")->required();

  PerturbArgs per;
  CLI::App* c_per = app.add_subcommand("perturb", "add bounded payoff noise");
  c_per->add_option("--game", per.game, "input game json")->required();
  auto* per_eps = c_per->add_option("--epsilon", per.epsilon, "entry noise magnitude");
  c_per->add_option("--target-delta", per.target_delta, "distance budget to invert")
      ->excludes(per_eps);
  c_per->add_option("--seed", per.seed, "noise seed");
  c_per->add_option("--out", per.out, "output game json")->required();
  c_per->add_option("--cert", per.cert, "optional certificate json path");

  ProjectArgs proj;
  CLI::App* c_proj = app.add_subcommand("project", "project onto the nearest zero-sum game");
  c_proj->add_option("--game", proj.game, "input game json")->required();
  c_proj->add_option("--out", proj.out, "output game json")->required();
  c_proj->add_option("--cert", proj.cert, "optional certificate json path");

  MpdArgs mpd;
  CLI::App* c_mpd = app.add_subcommand("mpd", "distance certificates between two games");
  c_mpd->add_option("--game", mpd.game, "first game json")->required();
  c_mpd->add_option("--other", mpd.other, "second game json")->required();
  c_mpd->add_option("--out", mpd.out, "optional output json");

  QreArgs qre;
  CLI::App* c_qre = app.add_subcommand("qre", "solve the softmax fixed point");
  c_qre->add_option("--game", qre.game, "input game json")->required();
  c_qre->add_option("--temp", qre.temps, "exploration rates (one value broadcasts)");
  c_qre->add_option("--damping", qre.damping, "fixed point damping in (0,1]");
  c_qre->add_option("--tol", qre.tol, "residual target");
  c_qre->add_option("--max-iter", qre.max_iter, "work budget");
  c_qre->add_option("--out", qre.out, "output json (stdout when omitted)");

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "integrate the learning flow");
  c_sim->add_option("--game", sim.game, "input game json")->required();
  c_sim->add_option("--temp", sim.temps, "exploration rates (one value broadcasts)");
  c_sim->add_option("--horizon", sim.horizon, "integration time");
  c_sim->add_option("--step", sim.step, "integrator step");
  c_sim->add_option("--x0", sim.x0, "uniform | random");
  c_sim->add_option("--x0-seed", sim.x0_seed, "seed for --x0 random");
  c_sim->add_option("--x0-sigma", sim.x0_sigma, "logit spread for --x0 random");
  c_sim->add_option("--ref", sim.ref, "auto | none (diagnostics anchor)");
  c_sim->add_option("--stride", sim.stride, "csv row stride");
  c_sim->add_option("--tail-fraction", sim.tail_fraction, "tail window for diagnostics");
  c_sim->add_option("--out", sim.out, "output directory")->required();

  NoisySimArgs noisy;
  CLI::App* c_noisy = app.add_subcommand("noisy-sim", "integrate against drifting payoffs");
  c_noisy->add_option("--game", noisy.game, "zero-sum base game json")->required();
  c_noisy->add_option("--temp", noisy.temps, "exploration rates (one value broadcasts)");
  auto* noisy_eps = c_noisy->add_option("--epsilon", noisy.epsilon, "entry noise magnitude");
  c_noisy->add_option("--target-delta", noisy.target_delta, "distance budget to invert")
      ->excludes(noisy_eps);
  c_noisy->add_option("--period", noisy.period, "steps between redraws");
  c_noisy->add_option("--horizon", noisy.horizon, "integration time");
  c_noisy->add_option("--step", noisy.step, "integrator step");
  c_noisy->add_option("--seed", noisy.seed, "noise seed");
  c_noisy->add_option("--x0", noisy.x0, "uniform | random");
  c_noisy->add_option("--x0-seed", noisy.x0_seed, "seed for --x0 random");
  c_noisy->add_option("--x0-sigma", noisy.x0_sigma, "logit spread for --x0 random");
  c_noisy->add_option("--stride", noisy.stride, "csv row stride");
  c_noisy->add_option("--tail-fraction", noisy.tail_fraction, "tail window for diagnostics");
  c_noisy->add_option("--out", noisy.out, "output directory")->required();

  EmbedArgs emb;
  CLI::App* c_emb = app.add_subcommand("embed", "strategy plane divergence map");
  c_emb->add_option("--game", emb.game, "input game json (two actions per agent)")->required();
  c_emb->add_option("--u", emb.u, "first base point, one probability per agent")->required();
  c_emb->add_option("--v", emb.v, "second base point, one probability per agent")->required();
  c_emb->add_option("--temp", emb.temps, "exploration rates (one value broadcasts)");
  c_emb->add_option("--alpha-lo", emb.alpha_lo, "alpha axis start");
  c_emb->add_option("--alpha-hi", emb.alpha_hi, "alpha axis end");
  c_emb->add_option("--alpha-steps", emb.alpha_steps, "alpha axis points");
  c_emb->add_option("--beta-lo", emb.beta_lo, "beta axis start");
  c_emb->add_option("--beta-hi", emb.beta_hi, "beta axis end");
  c_emb->add_option("--beta-steps", emb.beta_steps, "beta axis points");
  c_emb->add_option("--ref", emb.ref, "auto (diagnostics anchor)");
  c_emb->add_option("--out", emb.out, "output directory")->required();

  CampaignArgs camp;
  CLI::App* c_camp = app.add_subcommand("campaign", "run a batch spec");
  c_camp->add_option("--spec", camp.spec, "campaign spec json")->required();
  c_camp->add_option("--out", camp.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_gen) return run_generate(gen);
    if (*c_per) return run_perturb(per);
    if (*c_proj) return run_project(proj);
    if (*c_mpd) return run_mpd(mpd);
    if (*c_qre) return run_qre(qre);
    if (*c_sim) return run_simulate(sim);
    if (*c_noisy) return run_noisy_sim(noisy);
    if (*c_emb) return run_embed(emb);
    if (*c_camp) return run_campaign_cmd(camp);
  } catch (const polyq::invalid_input& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const polyq::boundary_error& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const polyq::integration_error& e) {
    std::fprintf(stderr, "numerical failure: %s (last valid t = %s)\n", e.what(),
                 polyq::format_double(e.last_valid_time()).c_str());
    return 2;
  } catch (const polyq::convergence_error& e) {
    std::fprintf(stderr, "numerical failure: %s (last residual = %s)\n", e.what(),
                 polyq::format_double(e.last_residual()).c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
