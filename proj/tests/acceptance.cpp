// Acceptance gate. Each check prints one [PASS]/[FAIL] line with measured
// numbers; the process exits nonzero if any check fails. Checks run against
// fixed seeds so the verdicts are reproducible run to run.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "polyq/polyq.hpp"
#include "support/lsq_oracle.hpp"
#include "support/oracles.hpp"

using namespace polyq;

namespace {

int g_pass = 0;
int g_fail = 0;

void report(bool ok, const char* tag, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", tag, detail.c_str());
  std::fflush(stdout);
  (ok ? g_pass : g_fail)++;
}

std::string fmt(double v) { return format_double(v); }

NetworkGame make_base(int agents, const std::string& graph, std::uint64_t seed) {
  GeneratorSpec spec;
  spec.agents = agents;
  spec.graph = graph;
  spec.seed = seed;
  return generate_game(spec);
}

JointStrategy interior_logit_state(const NetworkGame& g, std::uint64_t seed, double sigma) {
  for (int tries = 0; tries < 64; ++tries) {
    JointStrategy x = random_logit_strategy(g.action_counts(), seed + 7919u * tries, sigma);
    if (x.is_interior()) return x;
  }
  return JointStrategy::uniform(g);
}

struct CertifiedPair {
  NetworkGame base;
  NetworkGame near;
  TrapRegion region;
};

CertifiedPair certify_pair(int agents, const std::string& graph, std::uint64_t seed,
                           double target_delta, const ExplorationRates& rates) {
  NetworkGame base = make_base(agents, graph, seed);
  const double eps = epsilon_for_delta_abs(base, target_delta);
  PerturbedGame pg = perturb_game(base, eps, derive_seed(seed, 17));
  const MpdBound realized = mpd_bound_abs(base, pg.game);
  TrapRegion region = trap_region(base, realized, rates);
  return CertifiedPair{std::move(base), std::move(pg.game), std::move(region)};
}

// ---------------------------------------------------------------------------

void check_tail_containment() {
  const double temps = 0.75;
  const double horizon = 500.0, step = 0.01;
  int total = 0, contained = 0;
  double worst_ratio = 0.0;
  const double targets[3] = {0.75, 2.0, 3.0};
  struct Block {
    int agents;
    const char* graph;
    std::uint64_t seed0;
  };
  const Block blocks[3] = {{3, "chain", 1}, {5, "complete", 101}, {10, "random", 201}};
  for (const Block& blk : blocks) {
    for (int i = 0; i < 17; ++i) {
      const std::uint64_t seed = blk.seed0 + static_cast<std::uint64_t>(i);
      ExplorationRates rates = ExplorationRates::constant(temps, blk.agents);
      CertifiedPair pair = certify_pair(blk.agents, blk.graph, seed, targets[i % 3], rates);
      JointStrategy x0 = interior_logit_state(pair.near, derive_seed(seed, 29), 1.0);
      DiagnosticsSpec diag{pair.region.qre, pair.region.radius};
      TrajectoryRecord rec = integrate(pair.near, x0, rates, horizon, step, &diag);
      TailKl tail = asymptotic_kl(rec, pair.region, 0.2);
      ++total;
      if (tail.within_bound) ++contained;
      worst_ratio = std::max(worst_ratio, tail.max_tail_kl / pair.region.radius);
    }
  }
  report(contained == total && total >= 50, "C1 tail containment",
         fmt(contained) + "/" + fmt(total) +
             " runs stay within N*delta/T_min after the burn-in (worst tail/radius = " +
             fmt(worst_ratio) + ")");
}

void check_decrease_condition() {
  const std::uint64_t seeds[5] = {1, 6, 101, 106, 201};
  const int agents[5] = {3, 3, 5, 5, 10};
  const char* graphs[5] = {"chain", "chain", "complete", "complete", "random"};
  const double sigmas[3] = {0.5, 2.0, 3.0};
  long long checked = 0, active = 0, violations = 0;
  for (int p = 0; p < 5; ++p) {
    ExplorationRates rates = ExplorationRates::constant(0.75, agents[p]);
    CertifiedPair pair = certify_pair(agents[p], graphs[p], seeds[p], 0.75, rates);
    for (int s = 0; s < 1000; ++s) {
      JointStrategy x = interior_logit_state(
          pair.near, derive_seed(seeds[p], 1000 + static_cast<std::uint64_t>(s)),
          sigmas[s % 3]);
      LyapunovReport rep = lyapunov_check(pair.near, x, pair.region.qre, rates,
                                          pair.region.delta);
      ++checked;
      if (rep.condition) {
        ++active;
        if (!rep.decrease_observed) ++violations;
      }
    }
  }
  report(violations == 0 && active > 0, "C2 decrease condition",
         fmt(checked) + " states, " + fmt(active) + " beyond the threshold, " +
             fmt(violations) + " violations of d/dt KL < 0");
}

void check_zero_sum_convergence() {
  int ok = 0;
  double worst_residual = 0.0, worst_gap = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int agents = 3 + (i % 3);
    const char* graph = (i % 2) ? "complete" : "chain";
    NetworkGame g = make_base(agents, graph, 300 + static_cast<std::uint64_t>(i));
    ExplorationRates rates = ExplorationRates::constant(0.75, agents);
    TrajectoryRecord rec = integrate(g, JointStrategy::uniform(g), rates, 200.0, 0.01);
    const JointStrategy& fin = rec.states.back();
    const double resid = qre_residual(g, fin, rates);
    JointStrategy p = qre_solve(g, rates);
    double gap = 0;
    for (int k = 0; k < agents; ++k)
      for (int a = 0; a < g.actions(k); ++a)
        gap = std::max(gap, std::abs(fin.agent(k)[a] - p.agent(k)[a]));
    worst_residual = std::max(worst_residual, resid);
    worst_gap = std::max(worst_gap, gap);
    if (resid < 1e-8 && gap < 1e-6) ++ok;
  }
  report(ok == 20, "C3 zero-sum convergence",
         fmt(ok) + "/20 flows end at the fixed point (worst residual = " + fmt(worst_residual) +
             ", worst sup gap = " + fmt(worst_gap) + ")");
}

void check_projection_optimality() {
  Rng shape_rng(4242);
  int ok = 0;
  double worst_obj = 0.0, worst_entry = 0.0, worst_idem = 0.0, worst_zs = 0.0;
  for (int i = 0; i < 50; ++i) {
    const int agents = 2 + static_cast<int>(shape_rng.canonical() * 4);  // 2..5
    std::vector<int> counts(static_cast<std::size_t>(agents));
    for (int& c : counts) c = 2 + static_cast<int>(shape_rng.canonical() * 3);  // 2..4
    Rng graph_rng(derive_seed(9000, static_cast<std::uint64_t>(i)));
    std::vector<std::pair<int, int>> topo =
        agents == 2 ? std::vector<std::pair<int, int>>{{0, 1}}
                    : random_connected_edges(agents, 0.6, graph_rng);
    Rng entry_rng(derive_seed(9500, static_cast<std::uint64_t>(i)));
    std::vector<Edge> edges;
    for (auto [f, t] : topo) {
      Matrix a(counts[static_cast<std::size_t>(f)], counts[static_cast<std::size_t>(t)]);
      Matrix b(counts[static_cast<std::size_t>(t)], counts[static_cast<std::size_t>(f)]);
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = entry_rng.uniform(-1.0, 1.0);
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) b(r, c) = entry_rng.uniform(-1.0, 1.0);
      edges.push_back(Edge{f, t, std::move(a), std::move(b)});
    }
    NetworkGame g(counts, std::move(edges));
    ProjectionResult fast = nearest_nzsg(g);
    oracle::LsqProjection slow = oracle::lsq_nearest_constant_sum(g);
    const double d_obj = std::abs(fast.objective - slow.objective);
    double d_entry = 0.0;
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
      d_entry = std::max(d_entry,
                         (fast.projected.edges()[e].a - slow.projected.edges()[e].a).max_abs());
      d_entry = std::max(d_entry,
                         (fast.projected.edges()[e].b - slow.projected.edges()[e].b).max_abs());
    }
    const double zs = zero_sum_residual(fast.projected);
    const double idem = nearest_nzsg(fast.projected).objective;
    worst_obj = std::max(worst_obj, d_obj);
    worst_entry = std::max(worst_entry, d_entry);
    worst_zs = std::max(worst_zs, zs);
    worst_idem = std::max(worst_idem, idem);
    if (d_obj < 1e-8 && d_entry < 1e-6 && zs < 1e-8 && idem < 1e-10) ++ok;
  }
  report(ok == 50, "C4 projection optimality",
         fmt(ok) + "/50 match the dense solver (worst: objective " + fmt(worst_obj) +
             ", entries " + fmt(worst_entry) + ", zero-sum residual " + fmt(worst_zs) +
             ", reprojection cost " + fmt(worst_idem) + ")");
}

void check_conflict_certificate() {
  NetworkGame g = conflict_triangle_preset();
  ProjectionResult proj = nearest_nzsg(g);
  const double cert = proj.delta_2norm.value;
  const MpdBound exact = mpd_exact(g, proj.projected);
  std::printf("       (info) preset exact distance = %s (<= 7.2 is %s)\n", fmt(exact.value).c_str(),
              exact.value <= 7.2 ? "true" : "false");
  report(cert <= 7.2, "C5a preset norm certificate",
         "2-norm certificate = " + fmt(cert) + ", target <= 7.2");
}

void check_conflict_trajectories() {
  NetworkGame g = conflict_triangle_preset();
  ProjectionResult proj = nearest_nzsg(g);
  const double delta = 7.2;  // sound: the exact distance is below it
  const double temps[3] = {0.35, 0.5, 2.5};
  JointStrategy x0 = interior_logit_state(g, 777, 1.0);
  bool all_contained = true;
  std::map<double, double> tail_by_temp;
  for (double t : temps) {
    ExplorationRates rates = ExplorationRates::constant(t, 3);
    TrapRegion region = trap_region(proj.projected, delta, rates);
    DiagnosticsSpec diag{region.qre, region.radius};
    TrajectoryRecord rec = integrate(g, x0, rates, 500.0, 0.01, &diag);
    TailKl tail = asymptotic_kl(rec, region, 0.2);
    tail_by_temp[t] = tail.max_tail_kl;
    all_contained = all_contained && tail.within_bound;
  }
  const bool shrink = tail_by_temp[2.5] < tail_by_temp[0.35];
  report(all_contained && shrink, "C5b preset trap adherence",
         "contained at T in {0.35, 0.5, 2.5}; tail kl " + fmt(tail_by_temp[0.35]) + " at T=0.35 vs " +
             fmt(tail_by_temp[2.5]) + " at T=2.5");
}

void check_distance_ordering() {
  int ok = 0;
  double worst_oracle_gap = 0.0;
  for (int i = 0; i < 100; ++i) {
    Rng shape_rng(derive_seed(7700, static_cast<std::uint64_t>(i)));
    std::vector<int> counts(3);
    for (int& c : counts) c = 2 + static_cast<int>(shape_rng.canonical() * 2);  // 2..3
    std::vector<std::pair<int, int>> topo = (i % 2) ? std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}
                                                    : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 0}};
    auto build = [&](std::uint64_t seed) {
      Rng rng(seed);
      std::vector<Edge> edges;
      for (auto [f, t] : topo) {
        Matrix a(counts[static_cast<std::size_t>(f)], counts[static_cast<std::size_t>(t)]);
        Matrix b(counts[static_cast<std::size_t>(t)], counts[static_cast<std::size_t>(f)]);
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = rng.uniform(-1.0, 1.0);
        for (std::size_t r = 0; r < b.rows(); ++r)
          for (std::size_t c = 0; c < b.cols(); ++c) b(r, c) = rng.uniform(-1.0, 1.0);
        edges.push_back(Edge{f, t, std::move(a), std::move(b)});
      }
      return NetworkGame(counts, std::move(edges));
    };
    NetworkGame g1 = build(derive_seed(7800, static_cast<std::uint64_t>(i)));
    NetworkGame g2 = build(derive_seed(7900, static_cast<std::uint64_t>(i)));
    const double ex = mpd_exact(g1, g2).value;
    const double ab = mpd_bound_abs(g1, g2).value;
    const double tn = mpd_bound_2norm(g1, g2).value;
    const double ref = oracle::mpd_full_enumeration(g1, g2);
    worst_oracle_gap = std::max(worst_oracle_gap, std::abs(ex - ref));
    if (ex <= ab + 1e-12 && ab <= tn + 1e-12 && std::abs(ex - ref) <= 1e-12) ++ok;
  }
  report(ok == 100, "C6 distance ordering",
         fmt(ok) + "/100 pairs ordered exact <= entry bound <= norm bound; worst oracle gap = " +
             fmt(worst_oracle_gap));
}

void check_fixed_point_gap() {
  int ok = 0, total = 0;
  double worst_margin = -1e300;
  for (int i = 0; i < 100; ++i) {
    NetworkGame g = [&] {
      if (i < 34) return make_base(3, "chain", 500 + static_cast<std::uint64_t>(i));
      if (i < 67) {
        NetworkGame base = make_base(4, "complete", 600 + static_cast<std::uint64_t>(i));
        return perturb_game(base, 0.05, derive_seed(650, static_cast<std::uint64_t>(i))).game;
      }
      NetworkGame base = make_base(5, "random", 700 + static_cast<std::uint64_t>(i));
      return perturb_game(base, 0.05, derive_seed(750, static_cast<std::uint64_t>(i))).game;
    }();
    double max_log_n = 0;
    for (int k = 0; k < g.num_agents(); ++k)
      max_log_n = std::max(max_log_n, std::log(static_cast<double>(g.actions(k))));
    for (double t : {0.1, 0.75, 2.5}) {
      ExplorationRates rates = ExplorationRates::constant(t, g.num_agents());
      ++total;
      JointStrategy p = qre_solve(g, rates);
      const double gap = approximate_nash_gap(g, p).max_gap;
      const double budget = t * max_log_n;
      worst_margin = std::max(worst_margin, gap - budget);
      if (gap <= budget + 1e-12) ++ok;
    }
  }
  report(ok == total && total == 300, "C7 fixed point gap bound",
         fmt(ok) + "/" + fmt(total) + " gaps within (max T)(max ln n); worst gap - budget = " +
             fmt(worst_margin));
}

void check_field_identities() {
  // cross evaluation: the flow equals the replicator field of the entropy
  // bonus rewards, and entropy bonuses cancel in pairwise payoff differences
  double worst_field = 0.0;
  NetworkGame g = make_base(3, "chain", 808);
  NetworkGame g2 = perturb_game(g, 0.2, 809).game;
  ExplorationRates rates({0.4, 0.75, 1.3});
  for (int s = 0; s < 1000; ++s) {
    JointStrategy x = interior_logit_state(g, derive_seed(810, static_cast<std::uint64_t>(s)),
                                           2.0);
    const std::vector<std::vector<double>> f = qld_vector_field(g, x, rates);
    for (int k = 0; k < 3; ++k) {
      const std::vector<double> rh = perturbed_reward(g, x, k, rates);
      double mean = 0;
      for (std::size_t a = 0; a < rh.size(); ++a) mean += x.agent(k)[a] * rh[a];
      for (std::size_t a = 0; a < rh.size(); ++a)
        worst_field = std::max(
            worst_field,
            std::abs(f[static_cast<std::size_t>(k)][a] - x.agent(k)[a] * (rh[a] - mean)));
    }
  }
  const double worst_cancel = entropy_perturbation_mpd_discrepancy(g, g2, rates, 1000, 811);
  report(worst_field <= 1e-12 && worst_cancel <= 1e-10, "C8 field identities",
         "1000-point cross evaluation gap = " + fmt(worst_field) +
             ", entropy cancellation gap = " + fmt(worst_cancel));
}

void check_noise_robustness() {
  NetworkGame g = make_base(3, "chain", 901);
  ExplorationRates rates = ExplorationRates::constant(0.75, 3);
  const double deltas[3] = {0.75, 2.0, 3.0};
  const std::uint64_t seeds[3] = {11, 12, 13};
  bool contained = true, monotone = true;
  double worst_ratio = 0.0;
  for (std::uint64_t seed : seeds) {
    double prev = -1.0;
    for (double d : deltas) {
      const double eps = epsilon_for_delta_abs(g, d);
      NoisyRunResult res = noisy_run(g, rates, eps, 50, 500.0, 0.01, seed);
      TailKl tail = asymptotic_kl(res.trajectory, res.region, 0.8);  // all after 20% burn-in
      contained = contained && tail.within_bound;
      worst_ratio = std::max(worst_ratio, tail.max_tail_kl / res.region.radius);
      if (tail.max_tail_kl < prev - 1e-9) monotone = false;
      prev = tail.max_tail_kl;
    }
  }
  report(contained && monotone, "C9 noise robustness",
         std::string("post burn-in containment ") + (contained ? "holds" : "broken") +
             ", seed-matched tail spread monotone in delta " + (monotone ? "holds" : "broken") +
             " (worst tail/radius = " + fmt(worst_ratio) + ")");
}

// --- CLI determinism ---------------------------------------------------------

int run_cli(const std::string& args, const std::filesystem::path& stdout_file) {
  const std::string cmd = std::string(POLYQ_CLI_PATH) + " " + args + " > " +
                          stdout_file.string() + " 2>&1";
  return std::system(cmd.c_str());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool trees_identical(const std::filesystem::path& a, const std::filesystem::path& b,
                     std::string* diff) {
  std::map<std::string, std::filesystem::path> fa, fb;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa[std::filesystem::relative(e.path(), a).generic_string()] = e.path();
  for (const auto& e : std::filesystem::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb[std::filesystem::relative(e.path(), b).generic_string()] = e.path();
  if (fa.size() != fb.size()) {
    *diff = "file count " + std::to_string(fa.size()) + " vs " + std::to_string(fb.size());
    return false;
  }
  for (const auto& [rel, pa] : fa) {
    auto it = fb.find(rel);
    if (it == fb.end()) {
      *diff = "missing " + rel;
      return false;
    }
    if (slurp(pa) != slurp(it->second)) {
      *diff = "content differs: " + rel;
      return false;
    }
  }
  return true;
}

void check_cli_determinism(const std::filesystem::path& ws) {
  const std::filesystem::path root = ws / "cli";
  std::filesystem::remove_all(root);
  bool all_zero = true;
  auto pass = [&](const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::string d = dir.string();
    json camp;
    camp["name"] = "accept";
    camp["generator"] = {{"kind", "nzsg_random"}, {"graph", "chain"}, {"agents", 3}, {"seed", 5}};
    camp["runs"] = 2;
    camp["epsilon"] = 0.02;
    camp["horizon"] = 8.0;
    camp["seed"] = 7;
    camp["stride"] = 20;
    write_json_file(dir / "camp_spec.json", camp);
    const std::vector<std::string> cmds = {
        "generate --graph chain --agents 3 --seed 4 --out " + d + "/game.json",
        "generate --preset triangle --out " + d + "/conflict.json",
        "perturb --game " + d + "/game.json --target-delta 0.75 --seed 9 --out " + d +
            "/pert.json --cert " + d + "/pert_cert.json",
        "project --game " + d + "/conflict.json --out " + d + "/proj.json --cert " + d +
            "/proj_cert.json",
        "mpd --game " + d + "/conflict.json --other " + d + "/proj.json --out " + d + "/mpd.json",
        "qre --game " + d + "/game.json --temp 0.75 --out " + d + "/qre.json",
        "simulate --game " + d + "/pert.json --temp 0.75 --horizon 5 --step 0.01 --x0 random "
        "--x0-seed 3 --stride 10 --out " + d + "/sim",
        "noisy-sim --game " + d + "/game.json --temp 0.75 --target-delta 2 --period 50 "
        "--horizon 5 --seed 12 --out " + d + "/noisy",
        "embed --game " + d + "/proj.json --u 0.7 0.6 0.55 --v 0.3 0.35 0.4 --alpha-steps 5 "
        "--beta-steps 5 --out " + d + "/emb",
        "campaign --spec " + d + "/camp_spec.json --out " + d + "/camp"};
    int idx = 0;
    for (const std::string& c : cmds) {
      const int rc = run_cli(c, dir / ("stdout_" + std::to_string(idx++) + ".txt"));
      if (rc != 0) all_zero = false;
    }
  };
  pass(root / "run1");
  pass(root / "run2");
  std::string diff;
  const bool identical = trees_identical(root / "run1", root / "run2", &diff);
  report(all_zero && identical, "C10 CLI determinism",
         all_zero ? (identical ? "10 commands, re-runs byte-identical"
                               : "outputs differ: " + diff)
                  : "a command exited nonzero");
}

}  // namespace

int main() {
  const std::filesystem::path ws = std::filesystem::current_path() / "acceptance_tmp";
  std::filesystem::create_directories(ws);

  check_tail_containment();
  check_decrease_condition();
  check_zero_sum_convergence();
  check_projection_optimality();
  check_conflict_certificate();
  check_conflict_trajectories();
  check_distance_ordering();
  check_fixed_point_gap();
  check_field_identities();
  check_noise_robustness();
  check_cli_determinism(ws);

  std::printf("acceptance: %d/%d checks passed\n", g_pass, g_pass + g_fail);
  return g_fail == 0 ? 0 : 1;
}
