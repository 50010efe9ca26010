#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polyq/game.hpp"
#include "polyq/io.hpp"
#include "polyq/matrix.hpp"
#include "polyq/mpd.hpp"
#include "polyq/rates.hpp"
#include "polyq/rng.hpp"

#include "support/oracles.hpp"

using namespace polyq;

namespace {

NetworkGame matching_pennies() {
  Matrix a = Matrix::from_rows({{1, -1}, {-1, 1}});
  Matrix b = Matrix::from_rows({{-1, 1}, {1, -1}});  // b = -aᵀ, zero-sum
  return NetworkGame({2, 2}, {Edge{0, 1, a, b}});
}

NetworkGame random_game(std::uint64_t seed, std::vector<int> counts, std::vector<Edge> shape) {
  Rng rng(seed);
  for (Edge& e : shape) {
    for (std::size_t i = 0; i < e.a.rows(); ++i)
      for (std::size_t j = 0; j < e.a.cols(); ++j) e.a(i, j) = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < e.b.rows(); ++i)
      for (std::size_t j = 0; j < e.b.cols(); ++j) e.b(i, j) = rng.uniform(-1.0, 1.0);
  }
  return NetworkGame(std::move(counts), std::move(shape));
}

NetworkGame random_triangle(std::uint64_t seed, int n0 = 2, int n1 = 3, int n2 = 2) {
  std::vector<Edge> edges{Edge{0, 1, Matrix(n0, n1), Matrix(n1, n0)},
                          Edge{1, 2, Matrix(n1, n2), Matrix(n2, n1)},
                          Edge{2, 0, Matrix(n2, n0), Matrix(n0, n2)}};
  return random_game(seed, {n0, n1, n2}, std::move(edges));
}

JointStrategy random_strategy(const NetworkGame& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> probs;
  for (int k = 0; k < g.num_agents(); ++k) {
    std::vector<double> p(static_cast<std::size_t>(g.actions(k)));
    double s = 0;
    for (double& v : p) {
      v = std::exp(rng.uniform(-2.0, 2.0));
      s += v;
    }
    for (double& v : p) v /= s;
    probs.push_back(std::move(p));
  }
  return JointStrategy(std::move(probs));
}

}  // namespace

TEST_CASE("seed derivation separates streams and is stable") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  Rng a(derive_seed(42, 0));
  Rng b(derive_seed(42, 0));
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());
}

TEST_CASE("canonical draws live in the unit interval") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.canonical();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("gaussian draws have roughly standard moments") {
  Rng rng(5);
  double s1 = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s1 += g;
    s2 += g * g;
  }
  CHECK(std::abs(s1 / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("matrix transpose and matvec agree with direct loops") {
  Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  Matrix t = m.transpose();
  CHECK(t.rows() == 3);
  CHECK(t.cols() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(m(i, j) == t(j, i));
  std::vector<double> v{1, -1, 2};
  std::vector<double> mv = m.matvec(v);
  CHECK(mv[0] == doctest::Approx(1 - 2 + 6).epsilon(1e-15));
  CHECK(mv[1] == doctest::Approx(4 - 5 + 12).epsilon(1e-15));
}

TEST_CASE("spectral norm matches power iteration on random matrices") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = 1 + static_cast<int>(rng.canonical() * 4);
    const int c = 1 + static_cast<int>(rng.canonical() * 4);
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
    CHECK(spectral_norm(m) == doctest::Approx(oracle::power_spectral_norm(m)).epsilon(1e-9));
  }
}

TEST_CASE("game construction rejects malformed inputs") {
  Matrix a(2, 2), b(2, 2);
  CHECK_THROWS_AS(NetworkGame({2}, {}), invalid_input);               // single agent
  CHECK_THROWS_AS(NetworkGame({2, 1}, {}), invalid_input);            // one action
  CHECK_THROWS_AS(NetworkGame({2, 2}, {Edge{0, 0, a, b}}), invalid_input);  // self loop
  CHECK_THROWS_AS(NetworkGame({2, 2}, {Edge{0, 2, a, b}}), invalid_input);  // bad endpoint
  CHECK_THROWS_AS(NetworkGame({2, 2}, {Edge{0, 1, Matrix(2, 3), b}}), invalid_input);
  CHECK_THROWS_AS(NetworkGame({2, 2}, {Edge{0, 1, a, b}, Edge{1, 0, a, b}}), invalid_input);
  Matrix bad(2, 2);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(NetworkGame({2, 2}, {Edge{0, 1, bad, b}}), invalid_input);
}

TEST_CASE("strategy validation clamps noise and rejects junk") {
  // tiny negative from round-off is forgiven and renormalized
  JointStrategy ok(std::vector<std::vector<double>>{{1.0 + 5e-13, -5e-13}});
  CHECK(ok.agent(0)[1] == 0.0);
  CHECK(ok.agent(0)[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(JointStrategy(std::vector<std::vector<double>>{{0.5, 0.4}}), invalid_input);
  CHECK_THROWS_AS(JointStrategy(std::vector<std::vector<double>>{{1.5, -0.5}}), invalid_input);
  JointStrategy u = JointStrategy::uniform({2, 3});
  CHECK(u.agent(1)[2] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(u.is_interior());
  JointStrategy corner(std::vector<std::vector<double>>{{1.0, 0.0}, {0.5, 0.5}});
  CHECK_FALSE(corner.is_interior());
}

TEST_CASE("reward vectors match vertex payoffs") {
  NetworkGame g = random_triangle(17);
  JointStrategy x = random_strategy(g, 18);
  for (int k = 0; k < g.num_agents(); ++k) {
    const std::vector<double> r = reward_vector(g, x, k);
    const std::vector<double> ref = oracle::reward_by_vertex(g, x, k);
    for (std::size_t i = 0; i < r.size(); ++i)
      CHECK(r[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("payoff is the own strategy weighted reward") {
  NetworkGame g = random_triangle(23);
  JointStrategy x = random_strategy(g, 24);
  for (int k = 0; k < g.num_agents(); ++k) {
    const std::vector<double> r = reward_vector(g, x, k);
    double dot = 0;
    for (std::size_t i = 0; i < r.size(); ++i) dot += x.agent(k)[i] * r[i];
    CHECK(payoff(g, x, k) == doctest::Approx(dot).epsilon(1e-12));
  }
}

TEST_CASE("payoff is affine along own strategy segments") {
  NetworkGame g = random_triangle(31);
  JointStrategy x0 = random_strategy(g, 32);
  JointStrategy x1 = random_strategy(g, 33);
  // move only agent 1 along the segment; payoff of every agent stays affine
  auto blend = [&](double t) {
    std::vector<std::vector<double>> probs = x0.probs();
    for (std::size_t i = 0; i < probs[1].size(); ++i)
      probs[1][i] = (1 - t) * x0.agent(1)[i] + t * x1.agent(1)[i];
    return JointStrategy(std::move(probs));
  };
  for (int k = 0; k < 3; ++k) {
    const double u0 = payoff(g, blend(0.0), k);
    const double u1 = payoff(g, blend(1.0), k);
    const double um = payoff(g, blend(0.5), k);
    CHECK(um == doctest::Approx(0.5 * (u0 + u1)).epsilon(1e-12));
  }
}

TEST_CASE("nash gap is zero exactly at a best response profile") {
  NetworkGame g = matching_pennies();
  JointStrategy mixed = JointStrategy::uniform(g);
  NashGap gap = approximate_nash_gap(g, mixed);
  CHECK(gap.max_gap == doctest::Approx(0.0).epsilon(1e-15));
  JointStrategy tilted(std::vector<std::vector<double>>{{0.9, 0.1}, {0.5, 0.5}});
  CHECK(approximate_nash_gap(g, tilted).max_gap > 0.1);
}

TEST_CASE("zero sum holds for matching pennies and fails after a bump") {
  NetworkGame g = matching_pennies();
  CHECK(is_zero_sum(g, 1e-12));
  CHECK(zero_sum_residual(g) == doctest::Approx(0.0).epsilon(1e-15));
  JointStrategy x = random_strategy(g, 7);
  double total = 0;
  for (int k = 0; k < 2; ++k) total += payoff(g, x, k);
  CHECK(total == doctest::Approx(0.0).epsilon(1e-14));
  NetworkGame bumped = g;
  bumped.edges()[0].a(0, 0) += 0.25;
  CHECK_FALSE(is_zero_sum(bumped, 1e-9));
  CHECK(zero_sum_residual(bumped) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("zero sum payoff cancellation at sampled profiles") {
  // larger mixed game: totals vanish at 100 random mixed profiles
  NetworkGame base = random_triangle(41);
  // build a zero-sum version by antisymmetrizing each edge pair
  std::vector<Edge> edges = base.edges();
  for (Edge& e : edges) {
    Matrix bt = e.b.transpose();
    for (std::size_t i = 0; i < e.a.rows(); ++i)
      for (std::size_t j = 0; j < e.a.cols(); ++j) {
        const double s = 0.5 * (e.a(i, j) + bt(i, j));
        e.a(i, j) -= s;
      }
    Matrix at = e.a.transpose();
    for (std::size_t i = 0; i < e.b.rows(); ++i)
      for (std::size_t j = 0; j < e.b.cols(); ++j) e.b(i, j) = -at(i, j);
  }
  NetworkGame zs(base.action_counts(), std::move(edges));
  REQUIRE(is_zero_sum(zs, 1e-10));
  for (std::uint64_t s = 0; s < 100; ++s) {
    JointStrategy x = random_strategy(zs, 1000 + s);
    double total = 0;
    for (int k = 0; k < zs.num_agents(); ++k) total += payoff(zs, x, k);
    CHECK(std::abs(total) < 1e-10);
  }
}

TEST_CASE("zero sum residual certified bound keeps the verdict above the cap") {
  NetworkGame g = matching_pennies();
  // force the certified-bound path with a tiny enumeration budget
  CHECK(zero_sum_residual(g, 1) == doctest::Approx(0.0).epsilon(1e-15));
  NetworkGame bumped = g;
  bumped.edges()[0].a(1, 1) += 0.125;
  CHECK(zero_sum_residual(bumped, 1) > 0.0);
}

TEST_CASE("pairwise constant sums are recovered per edge") {
  Matrix a = Matrix::from_rows({{1, 0}, {0, 1}});
  Matrix b = Matrix::from_rows({{0, 1}, {1, 0}});  // a_ij + b_ji = 1 everywhere
  NetworkGame g({2, 2}, {Edge{0, 1, a, b}});
  std::vector<double> c;
  CHECK(is_pairwise_constant_sum(g, 1e-12, &c));
  REQUIRE(c.size() == 1);
  CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_FALSE(is_zero_sum(g, 1e-9));  // constants do not sum to zero
}

TEST_CASE("distance is symmetric, triangular, and zero on identical games") {
  NetworkGame g1 = random_triangle(51);
  NetworkGame g2 = random_triangle(52);
  NetworkGame g3 = random_triangle(53);
  CHECK(mpd_exact(g1, g1).value == 0.0);
  const double d12 = mpd_exact(g1, g2).value;
  const double d21 = mpd_exact(g2, g1).value;
  const double d13 = mpd_exact(g1, g3).value;
  const double d32 = mpd_exact(g3, g2).value;
  CHECK(d12 == doctest::Approx(d21).epsilon(1e-12));
  CHECK(d12 <= d13 + d32 + 1e-10);
  CHECK(d12 > 0.0);
}

TEST_CASE("distance matches full profile enumeration") {
  for (std::uint64_t seed : {61, 62, 63, 64, 65}) {
    NetworkGame g1 = random_triangle(seed);
    NetworkGame g2 = random_triangle(seed + 100);
    const MpdBound d = mpd_exact(g1, g2);
    CHECK(d.kind == MpdKind::exact);
    CHECK(d.value == doctest::Approx(oracle::mpd_full_enumeration(g1, g2)).epsilon(1e-12));
  }
}

TEST_CASE("certificate chain orders exact below entry and norm bounds") {
  for (std::uint64_t seed : {71, 72, 73, 74, 75, 76, 77, 78}) {
    NetworkGame g1 = random_triangle(seed, 2, 4, 3);
    NetworkGame g2 = random_triangle(seed + 500, 2, 4, 3);
    const double ex = mpd_exact(g1, g2).value;
    const double ab = mpd_bound_abs(g1, g2).value;
    const double tn = mpd_bound_2norm(g1, g2).value;
    CHECK(ex <= ab + 1e-12);
    CHECK(ab <= tn + 1e-12);
  }
}

TEST_CASE("entry bound reduces to the textbook single edge formula") {
  Matrix a1 = Matrix::from_rows({{0.05, 0.0}, {0.0, 0.05}});
  Matrix z(2, 2);
  NetworkGame g1({2, 2}, {Edge{0, 1, a1, z}});
  NetworkGame g2({2, 2}, {Edge{0, 1, z, z}});
  // factor 2·n_k·n_l = 8 per agent, largest entry 0.05
  CHECK(mpd_bound_abs(g1, g2).value == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(mpd_exact(g1, g2).value <= 0.4);
}

TEST_CASE("enumeration cap degrades the certificate kind but keeps an upper bound") {
  NetworkGame g1 = random_triangle(81, 3, 3, 3);
  NetworkGame g2 = random_triangle(82, 3, 3, 3);
  const MpdBound exact = mpd_exact(g1, g2);
  const MpdBound capped = mpd_exact(g1, g2, 2);
  CHECK(exact.kind == MpdKind::exact);
  CHECK(capped.kind == MpdKind::abs_entry_bound);
  CHECK(capped.value >= exact.value - 1e-12);
}

TEST_CASE("entropy terms cancel in pairwise payoff differences") {
  NetworkGame g1 = random_triangle(91);
  NetworkGame g2 = random_triangle(92);
  ExplorationRates rates({0.3, 0.75, 1.5});
  CHECK(perturbed_game_mpd_identity_check(g1, g2, rates, 200, 9, 1e-10));
  CHECK(entropy_perturbation_mpd_discrepancy(g1, g2, rates, 200, 9) < 1e-12);
}

TEST_CASE("entropy bonus shifts payoffs by the exact entropy") {
  NetworkGame g = matching_pennies();
  JointStrategy u = JointStrategy::uniform(g);
  const double t = 0.75;
  CHECK(perturbed_payoff(g, u, 0, t) ==
        doctest::Approx(payoff(g, u, 0) + t * std::log(2.0)).epsilon(1e-15));
  const std::vector<double> rh = perturbed_reward(g, u, 0, t);
  const std::vector<double> r = reward_vector(g, u, 0);
  for (int i = 0; i < 2; ++i)
    CHECK(rh[static_cast<std::size_t>(i)] ==
          doctest::Approx(r[static_cast<std::size_t>(i)] - t * (std::log(0.5) + 1.0))
              .epsilon(1e-15));
  JointStrategy corner(std::vector<std::vector<double>>{{1.0, 0.0}, {0.5, 0.5}});
  CHECK_THROWS_AS(perturbed_reward(g, corner, 0, t), boundary_error);
}

TEST_CASE("game json round trip preserves every bit") {
  NetworkGame g = random_triangle(101, 2, 4, 3);
  const json j = game_to_json(g);
  NetworkGame back = game_from_json(j);
  REQUIRE(back.num_agents() == g.num_agents());
  REQUIRE(back.edges().size() == g.edges().size());
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    CHECK(back.edges()[e].from == g.edges()[e].from);
    CHECK(back.edges()[e].to == g.edges()[e].to);
    for (std::size_t i = 0; i < g.edges()[e].a.rows(); ++i)
      for (std::size_t jj = 0; jj < g.edges()[e].a.cols(); ++jj)
        CHECK(back.edges()[e].a(i, jj) == g.edges()[e].a(i, jj));
    for (std::size_t i = 0; i < g.edges()[e].b.rows(); ++i)
      for (std::size_t jj = 0; jj < g.edges()[e].b.cols(); ++jj)
        CHECK(back.edges()[e].b(i, jj) == g.edges()[e].b(i, jj));
  }
  // and through a file
  const std::filesystem::path p = std::filesystem::temp_directory_path() / "polyq_rt.json";
  write_game(p, g);
  NetworkGame back2 = read_game(p);
  CHECK(back2.edges()[0].a(0, 0) == g.edges()[0].a(0, 0));
  std::filesystem::remove(p);
}

TEST_CASE("malformed game json reports invalid input") {
  CHECK_THROWS_AS(game_from_json(json::parse(R"({"agents": [2,2]})")), invalid_input);
  CHECK_THROWS_AS(game_from_json(json::parse(R"({"agents": [2,2], "edges": 3})")), invalid_input);
  CHECK_THROWS_AS(
      game_from_json(json::parse(
          R"({"agents": [2,2], "edges": [{"from":0,"to":1,"A":[[1,2]],"B":[[1],[2]]}]})")),
      invalid_input);
}

TEST_CASE("doubles print with round trip fidelity") {
  for (double v : {0.1, 1.0 / 3.0, 7.95, -2.5e-13, 1e300, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("trajectory csv uses the documented header and stride") {
  TrajectoryRecord rec;
  JointStrategy a(std::vector<std::vector<double>>{{0.25, 0.75}});
  JointStrategy b(std::vector<std::vector<double>>{{0.5, 0.5}});
  rec.times = {0.0, 0.01, 0.02};
  rec.states = {a, b, a};
  const std::filesystem::path p = std::filesystem::temp_directory_path() / "polyq_traj.csv";
  write_trajectory_csv(rec, p, 2);
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,agent,action,prob,kl_p_x,kl_x_p");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  // stride 2 keeps t=0 and t=0.02, and the final record is not duplicated
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "0,0,0,0.25,nan,nan");
  CHECK(rows[3] == "0.02,0,1,0.75,nan,nan");
  std::filesystem::remove(p);
}

TEST_CASE("file hashes are stable and content sensitive") {
  const std::filesystem::path p = std::filesystem::temp_directory_path() / "polyq_hash.txt";
  write_text_file(p, "alpha");
  const std::string h1 = file_hash(p);
  CHECK(h1 == file_hash(p));
  CHECK(h1.size() == 16);
  write_text_file(p, "alphb");
  CHECK(h1 != file_hash(p));
  std::filesystem::remove(p);
}
