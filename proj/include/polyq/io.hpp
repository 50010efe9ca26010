#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "polyq/dynamics.hpp"
#include "polyq/errors.hpp"
#include "polyq/game.hpp"
#include "polyq/generators.hpp"

namespace polyq {

using json = nlohmann::json;

// Shortest round-trip decimal form; the same value always prints the same
// bytes, so emitted files are reproducible.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw invalid_input("matrix must be a nonempty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw invalid_input("matrix rows must be nonempty arrays");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw invalid_input("matrix rows must have equal lengths");
    for (std::size_t jj = 0; jj < cols; ++jj) m(i, jj) = j[i][jj].get<double>();
  }
  return m;
}

inline json game_to_json(const NetworkGame& g) {
  json out;
  out["agents"] = g.action_counts();
  json edges = json::array();
  for (const Edge& e : g.edges()) {
    json je;
    je["from"] = e.from;
    je["to"] = e.to;
    je["A"] = matrix_to_json(e.a);
    je["B"] = matrix_to_json(e.b);
    edges.push_back(std::move(je));
  }
  out["edges"] = std::move(edges);
  return out;
}

inline NetworkGame game_from_json(const json& j) {
  try {
    std::vector<int> counts = j.at("agents").get<std::vector<int>>();
    std::vector<Edge> edges;
    for (const json& je : j.at("edges")) {
      Edge e;
      e.from = je.at("from").get<int>();
      e.to = je.at("to").get<int>();
      e.a = matrix_from_json(je.at("A"));
      e.b = matrix_from_json(je.at("B"));
      edges.push_back(std::move(e));
    }
    return NetworkGame(std::move(counts), std::move(edges));
  } catch (const json::exception& ex) {
    throw invalid_input(std::string("malformed game document: ") + ex.what());
  }
}

inline json strategy_to_json(const JointStrategy& x) { return json(x.probs()); }

inline JointStrategy strategy_from_json(const json& j) {
  try {
    return JointStrategy(j.get<std::vector<std::vector<double>>>());
  } catch (const json::exception& ex) {
    throw invalid_input(std::string("malformed strategy document: ") + ex.what());
  }
}

inline json generator_spec_to_json(const GeneratorSpec& s) {
  json j;
  j["kind"] = s.kind;
  j["graph"] = s.graph;
  j["agents"] = s.agents;
  j["actions"] = s.actions;
  j["seed"] = s.seed;
  j["entry_lo"] = s.entry_lo;
  j["entry_hi"] = s.entry_hi;
  j["edge_prob"] = s.edge_prob;
  return j;
}

inline GeneratorSpec generator_spec_from_json(const json& j) {
  try {
    GeneratorSpec s;
    s.kind = j.value("kind", s.kind);
    s.graph = j.value("graph", s.graph);
    s.agents = j.value("agents", s.agents);
    if (j.contains("actions")) {
      if (j["actions"].is_array())
        s.actions = j["actions"].get<std::vector<int>>();
      else
        s.actions = {j["actions"].get<int>()};
    }
    s.seed = j.value("seed", s.seed);
    s.entry_lo = j.value("entry_lo", s.entry_lo);
    s.entry_hi = j.value("entry_hi", s.entry_hi);
    s.edge_prob = j.value("edge_prob", s.edge_prob);
    return s;
  } catch (const json::exception& ex) {
    throw invalid_input(std::string("malformed generator spec: ") + ex.what());
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open file: " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& ex) {
    throw invalid_input("cannot parse " + path.string() + ": " + ex.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot write file: " + path.string());
  out << text;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

inline NetworkGame read_game(const std::filesystem::path& path) {
  return game_from_json(read_json_file(path));
}

inline void write_game(const std::filesystem::path& path, const NetworkGame& g) {
  write_json_file(path, game_to_json(g));
}

// Sampled trajectory as flat CSV: one row per (time, agent, action). The
// divergence columns are joint quantities, repeated on each row of their
// time; they read "nan" when the run recorded no reference point. Rows are
// kept at every `stride`-th record plus the final one.
inline void write_trajectory_csv(const TrajectoryRecord& rec, const std::filesystem::path& path,
                                 std::size_t stride = 1) {
  if (stride == 0) throw invalid_input("stride must be positive");
  std::ostringstream out;
  out << "t,agent,action,prob,kl_p_x,kl_x_p\n";
  const std::size_t last = rec.states.empty() ? 0 : rec.states.size() - 1;
  for (std::size_t i = 0; i < rec.states.size(); ++i) {
    if (i % stride != 0 && i != last) continue;
    const std::string t = format_double(rec.times[i]);
    const std::string d_px = rec.has_diagnostics() ? format_double(rec.kl_p_x[i]) : "nan";
    const std::string d_xp = rec.has_diagnostics() ? format_double(rec.kl_x_p[i]) : "nan";
    const JointStrategy& x = rec.states[i];
    for (int k = 0; k < x.num_agents(); ++k)
      for (std::size_t a = 0; a < x.agent(k).size(); ++a)
        out << t << ',' << k << ',' << a << ',' << format_double(x.agent(k)[a]) << ',' << d_px
            << ',' << d_xp << '\n';
  }
  write_text_file(path, out.str());
}

inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot open file for hashing: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  const std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
  char buf[17];
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace polyq
