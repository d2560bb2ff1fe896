#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "apbu/apriori.hpp"
#include "apbu/corpus.hpp"
#include "apbu/formula.hpp"
#include "apbu/io.hpp"
#include "apbu/kripke.hpp"

namespace test_helpers {

using namespace apbu;

inline const Corpus& corpus() {
  static Corpus c = load_corpus(12);
  return c;
}

inline KripkeModel corpus_model(const std::string& name) {
  return parse_km(corpus().resolver.read(name), name);
}

inline AprioriUpdate corpus_update(const std::string& name) {
  return parse_kmu(corpus().resolver.read(name), corpus().resolver, dir_of(name), name);
}

// The expected ten-world model after agent a's recovery update on the
// two-muddy-assumption model, built arrow by arrow from the paper's figure.
inline PointedModel expected_mcp_result() {
  KripkeModel m = make_model("expected", {"a", "b", "c"}, {"ma", "mb", "mc"});
  auto add = [&](const std::string& w, std::vector<std::string> atoms) {
    m.add_world(w, atoms);
  };
  add("Areal", {"ma"});
  add("ABC", {"ma", "mb", "mc"});
  add("AB", {"ma", "mb"});
  add("AC", {"ma", "mc"});
  add("BC", {"mb", "mc"});
  add("a$trial$A", {"ma"});
  add("a$backup$ABC", {"ma", "mb", "mc"});
  add("a$backup$AB", {"ma", "mb"});
  add("a$backup$AC", {"ma", "mc"});
  add("a$backup$BC", {"mb", "mc"});
  for (const std::string& w : {"ABC", "AB", "AC", "BC"}) {
    for (const std::string& agent : {"a", "b", "c"}) {
      m.add_pair(agent, w, w, false);
      m.add_pair(agent, "a$backup$" + w, "a$backup$" + w, false);
    }
  }
  m.add_pair("a", "ABC", "BC", true);
  m.add_pair("b", "ABC", "AC", true);
  m.add_pair("c", "ABC", "AB", true);
  m.add_pair("a", "a$backup$ABC", "a$backup$BC", true);
  m.add_pair("b", "a$backup$ABC", "a$backup$AC", true);
  m.add_pair("c", "a$backup$ABC", "a$backup$AB", true);
  m.add_pair("b", "Areal", "AB", false);
  m.add_pair("c", "Areal", "AC", false);
  m.add_pair("a", "Areal", "a$trial$A", false);
  m.add_pair("a", "a$trial$A", "a$trial$A", false);
  m.add_pair("b", "a$trial$A", "a$backup$AB", false);
  m.add_pair("c", "a$trial$A", "a$backup$AC", false);
  return pointed(std::move(m), "Areal");
}

// --- random generation -----------------------------------------------------------

struct Rng {
  std::mt19937 engine;
  explicit Rng(unsigned seed) : engine(seed) {}

  int pick(int lo, int hi) {  // inclusive
    return std::uniform_int_distribution<int>(lo, hi)(engine);
  }
  bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(engine) < p; }
};

inline void close_introspective(Relation& r) {
  while (true) {
    Relation next = r;
    for (const auto& [w, v] : r) {
      for (const auto& [v2, u] : r) {
        if (v2 == v) next.emplace(w, u);  // transitivity
      }
      for (const auto& [w2, u] : r) {
        if (w2 == w) next.emplace(v, u);  // euclideanity
      }
    }
    if (next == r) return;
    r = std::move(next);
  }
}

// Introspective pointed model whose point (world 0) has no incident arrows at
// all for `updating_agent` and no incoming arrows for anyone (the fallibilist
// setting the update examples live in).
inline PointedModel random_target(Rng& rng, const std::string& updating_agent,
                                  int max_worlds = 6) {
  int n = rng.pick(2, max_worlds);
  int n_agents = rng.pick(2, 3);
  std::vector<std::string> agents = {"a", "b", "c"};
  agents.resize(n_agents);
  int n_atoms = rng.pick(1, 3);
  std::vector<std::string> atoms = {"p", "q", "r"};
  atoms.resize(n_atoms);
  KripkeModel m = make_model("target", agents, atoms);
  for (int w = 0; w < n; ++w) {
    m.worlds.push_back("v" + std::to_string(w));
  }
  for (std::size_t a = 0; a < m.agents.size(); ++a) {
    Relation r;
    for (int u = 1; u < n; ++u) {
      for (int v = 1; v < n; ++v) {
        if (rng.chance(0.3)) r.emplace(u, v);
      }
    }
    if (m.agents[a] != updating_agent) {
      for (int v = 1; v < n; ++v) {
        if (rng.chance(0.35)) r.emplace(0, v);
      }
    }
    close_introspective(r);
    m.relations[a] = std::move(r);
  }
  for (std::size_t p = 0; p < m.atoms.size(); ++p) {
    for (int w = 0; w < n; ++w) {
      if (rng.chance(0.5)) m.valuation[p].insert(w);
    }
  }
  return PointedModel{std::move(m), 0};
}

// Random partial equivalence relation: isolate some worlds, partition the
// rest into cliques.
inline Relation random_per(Rng& rng, int n, bool ensure_cluster) {
  std::vector<int> live;
  for (int w = 0; w < n; ++w) {
    if (rng.chance(0.75)) live.push_back(w);
  }
  if (ensure_cluster && live.empty()) live.push_back(rng.pick(0, n - 1));
  std::shuffle(live.begin(), live.end(), rng.engine);
  Relation r;
  std::size_t i = 0;
  while (i < live.size()) {
    std::size_t size = 1 + rng.pick(0, 2);
    size = std::min(size, live.size() - i);
    for (std::size_t x = 0; x < size; ++x) {
      for (std::size_t y = 0; y < size; ++y) {
        r.emplace(live[i + x], live[i + y]);
      }
    }
    i += size;
  }
  return r;
}

inline KripkeModel random_quasi_epistemic(Rng& rng, const std::vector<std::string>& agents,
                                          const std::vector<std::string>& atoms,
                                          const std::string& cluster_agent, int max_worlds = 6,
                                          const std::string& name = "trial") {
  int n = rng.pick(1, max_worlds);
  KripkeModel m = make_model(name, agents, atoms);
  for (int w = 0; w < n; ++w) m.worlds.push_back("t" + std::to_string(w));
  for (std::size_t a = 0; a < agents.size(); ++a) {
    m.relations[a] = random_per(rng, n, agents[a] == cluster_agent);
  }
  for (std::size_t p = 0; p < atoms.size(); ++p) {
    for (int w = 0; w < n; ++w) {
      if (rng.chance(0.5)) m.valuation[p].insert(w);
    }
  }
  return m;
}

// Valid update for `agent` against `target`: random quasi-epistemic trial, a
// random maximal cluster, and a backup made of copies of a trial subset (the
// correspondence is the copy map, so coherency holds by construction) plus
// unmapped junk worlds. `avoid_mapping_cluster_successors` steers instances
// toward the post-update state where the agent believes everyone else is
// inconsistent.
inline AprioriUpdate random_update(Rng& rng, const PointedModel& target,
                                   const std::string& agent,
                                   bool avoid_mapping_cluster_successors = false,
                                   const std::string& avoided_agent = "b") {
  AprioriUpdate u;
  u.name = "u_rand";
  u.agent = agent;
  u.trial = random_quasi_epistemic(rng, target.model.agents, target.model.atoms, agent);
  ClusterPartition parts = clusters(u.trial, agent);
  u.cluster.clear();
  const auto& chosen = parts.clusters[rng.pick(0, static_cast<int>(parts.clusters.size()) - 1)];
  for (int w : chosen) u.cluster.push_back(u.trial.worlds[w]);

  std::set<int> banned;
  if (avoid_mapping_cluster_successors) {
    int other = u.trial.agent_index(avoided_agent);
    for (int w : chosen) {
      for (int v : u.trial.successors(other, w)) banned.insert(v);
    }
  }
  std::vector<int> subset;
  for (int w = 0; w < static_cast<int>(u.trial.worlds.size()); ++w) {
    if (!banned.count(w) && rng.chance(0.6)) subset.push_back(w);
  }

  u.backup = make_model("backup", target.model.agents, target.model.atoms);
  for (int w : subset) u.backup.worlds.push_back("c_" + u.trial.worlds[w]);
  int junk = rng.pick(subset.empty() ? 1 : 0, 2);
  for (int j = 0; j < junk; ++j) u.backup.worlds.push_back("j" + std::to_string(j));
  std::map<int, int> to_backup;
  for (std::size_t i = 0; i < subset.size(); ++i) to_backup[subset[i]] = static_cast<int>(i);
  for (std::size_t a = 0; a < u.backup.agents.size(); ++a) {
    for (const auto& [x, y] : u.trial.relations[a]) {
      if (to_backup.count(x) && to_backup.count(y)) {
        u.backup.relations[a].emplace(to_backup[x], to_backup[y]);
      }
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(junk); ++j) {
      int w = static_cast<int>(subset.size() + j);
      if (rng.chance(0.5)) u.backup.relations[a].emplace(w, w);
    }
  }
  for (std::size_t p = 0; p < u.backup.atoms.size(); ++p) {
    for (int w : subset) {
      if (u.trial.atom_true_at(static_cast<int>(p), w)) {
        u.backup.valuation[p].insert(to_backup[w]);
      }
    }
    for (std::size_t j = 0; j < static_cast<std::size_t>(junk); ++j) {
      if (rng.chance(0.5)) u.backup.valuation[p].insert(static_cast<int>(subset.size() + j));
    }
  }
  for (int w : subset) {
    u.correspondence.emplace_back(u.trial.worlds[w], "c_" + u.trial.worlds[w]);
  }
  return u;
}

// Random formula: `agents` lists the belief modalities allowed (may be
// empty for purely propositional output).
inline Formula random_formula(Rng& rng, int depth, const std::vector<std::string>& atoms,
                              const std::vector<std::string>& agents,
                              bool allow_announce = false) {
  int options = depth == 0 ? 2 : (agents.empty() ? 4 : (allow_announce ? 6 : 5));
  switch (rng.pick(0, options - 1)) {
    case 0:
      return rng.chance(0.15) ? Formula::falsum()
                              : Formula::atom(atoms[rng.pick(0, atoms.size() - 1)]);
    case 1:
      return Formula::atom(atoms[rng.pick(0, atoms.size() - 1)]);
    case 2:
      return Formula::negation(random_formula(rng, depth, atoms, agents, allow_announce));
    case 3:
      return Formula::conjunction(random_formula(rng, depth - 1, atoms, agents, allow_announce),
                                  random_formula(rng, depth - 1, atoms, agents, allow_announce));
    case 4:
      return Formula::believes(agents[rng.pick(0, agents.size() - 1)],
                               random_formula(rng, depth - 1, atoms, agents, allow_announce));
    default:
      return Formula::announced(random_formula(rng, depth - 1, atoms, agents, allow_announce),
                                random_formula(rng, depth - 1, atoms, agents, allow_announce));
  }
}

}  // namespace test_helpers
