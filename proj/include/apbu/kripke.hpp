#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "apbu/error.hpp"
#include "apbu/formula.hpp"

namespace apbu {

// Directed relation over world indices, stored as an explicit pair set.
// Everything downstream is direct quantifier evaluation over these sets;
// models here stay well under ~30 worlds.
using Relation = std::set<std::pair<int, int>>;

struct KripkeModel {
  std::string name;
  std::vector<std::string> agents;
  std::vector<std::string> atoms;
  std::vector<std::string> worlds;            // declaration order, unique
  std::vector<Relation> relations;            // one per agent
  std::vector<std::set<int>> valuation;       // one world set per atom

  int agent_index(const std::string& a) const { return index_of(agents, a); }
  int atom_index(const std::string& p) const { return index_of(atoms, p); }
  int world_index(const std::string& w) const { return index_of(worlds, w); }

  bool atom_true_at(int atom, int world) const { return valuation[atom].count(world) != 0; }

  std::set<int> successors(int agent, int world) const {
    std::set<int> out;
    for (const auto& [u, v] : relations[agent]) {
      if (u == world) out.insert(v);
    }
    return out;
  }

  void add_world(const std::string& w, const std::vector<std::string>& true_atoms = {}) {
    if (world_index(w) >= 0) throw Error(errkind::parse, "duplicate world '" + w + "'");
    worlds.push_back(w);
    for (const auto& p : true_atoms) {
      int pi = atom_index(p);
      if (pi < 0) throw Error(errkind::undeclared, "undeclared atom '" + p + "'");
      valuation[pi].insert(static_cast<int>(worlds.size()) - 1);
    }
  }

  void add_pair(const std::string& agent, const std::string& w1, const std::string& w2,
                bool both_directions) {
    int ai = agent_index(agent);
    if (ai < 0) throw Error(errkind::undeclared, "undeclared agent '" + agent + "'");
    int i = world_index(w1), j = world_index(w2);
    if (i < 0) throw Error(errkind::undeclared, "undeclared world '" + w1 + "'");
    if (j < 0) throw Error(errkind::undeclared, "undeclared world '" + w2 + "'");
    relations[ai].emplace(i, j);
    if (both_directions) relations[ai].emplace(j, i);
  }

private:
  static int index_of(const std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
  }
};

inline KripkeModel make_model(std::string name, std::vector<std::string> agents,
                              std::vector<std::string> atoms) {
  KripkeModel m;
  m.name = std::move(name);
  m.agents = std::move(agents);
  m.atoms = std::move(atoms);
  m.relations.assign(m.agents.size(), {});
  m.valuation.assign(m.atoms.size(), {});
  return m;
}

struct PointedModel {
  KripkeModel model;
  int point = 0;

  const std::string& point_name() const { return model.worlds[point]; }
};

inline PointedModel pointed(KripkeModel m, const std::string& world) {
  int w = m.world_index(world);
  if (w < 0) throw Error(errkind::undeclared, "undeclared world '" + world + "'");
  return PointedModel{std::move(m), w};
}

// Structural equality up to reordering of worlds (names, relations and
// valuation must agree). Used by order-independence tests.
inline bool same_model_unordered(const KripkeModel& x, const KripkeModel& y) {
  if (x.agents != y.agents || x.atoms != y.atoms) return false;
  std::set<std::string> wx(x.worlds.begin(), x.worlds.end());
  std::set<std::string> wy(y.worlds.begin(), y.worlds.end());
  if (wx != wy || wx.size() != x.worlds.size() || wy.size() != y.worlds.size()) return false;
  for (std::size_t a = 0; a < x.agents.size(); ++a) {
    std::set<std::pair<std::string, std::string>> px, py;
    for (const auto& [u, v] : x.relations[a]) px.emplace(x.worlds[u], x.worlds[v]);
    for (const auto& [u, v] : y.relations[a]) py.emplace(y.worlds[u], y.worlds[v]);
    if (px != py) return false;
  }
  for (std::size_t p = 0; p < x.atoms.size(); ++p) {
    std::set<std::string> vx, vy;
    for (int w : x.valuation[p]) vx.insert(x.worlds[w]);
    for (int w : y.valuation[p]) vy.insert(y.worlds[w]);
    if (vx != vy) return false;
  }
  return true;
}

// --- Relation property classification -------------------------------------

struct AgentRelationFlags {
  bool reflexive = false;
  bool transitive = false;
  bool euclidean = false;
  bool symmetric = false;

  bool equivalence() const { return reflexive && transitive && euclidean; }
  bool partial_equivalence() const { return transitive && symmetric; }
  bool introspective() const { return transitive && euclidean; }
};

struct RelationProfile {
  std::vector<AgentRelationFlags> per_agent;
  bool epistemic = false;        // all relations equivalences
  bool quasi_epistemic = false;  // all relations partial equivalences
  bool introspective = false;    // all relations transitive and euclidean
};

inline bool relation_reflexive(const Relation& r, int n) {
  for (int w = 0; w < n; ++w) {
    if (!r.count({w, w})) return false;
  }
  return true;
}

inline bool relation_transitive(const Relation& r) {
  for (const auto& [w, v] : r) {
    for (const auto& [v2, u] : r) {
      if (v2 == v && !r.count({w, u})) return false;
    }
  }
  return true;
}

inline bool relation_euclidean(const Relation& r) {
  for (const auto& [w, v] : r) {
    for (const auto& [w2, u] : r) {
      if (w2 == w && !r.count({v, u})) return false;
    }
  }
  return true;
}

inline bool relation_symmetric(const Relation& r) {
  for (const auto& [w, v] : r) {
    if (!r.count({v, w})) return false;
  }
  return true;
}

inline RelationProfile classify(const KripkeModel& m) {
  RelationProfile out;
  int n = static_cast<int>(m.worlds.size());
  out.epistemic = out.quasi_epistemic = out.introspective = true;
  for (const auto& r : m.relations) {
    AgentRelationFlags f;
    f.reflexive = relation_reflexive(r, n);
    f.transitive = relation_transitive(r);
    f.euclidean = relation_euclidean(r);
    f.symmetric = relation_symmetric(r);
    out.epistemic &= f.equivalence();
    out.quasi_epistemic &= f.partial_equivalence();
    out.introspective &= f.introspective();
    out.per_agent.push_back(f);
  }
  return out;
}

// --- Clusters ---------------------------------------------------------------

// A partial equivalence relation partitions the non-isolated worlds into
// clusters (maximal cliques of the relation); isolated worlds carry no
// incident pair at all.
struct ClusterPartition {
  std::vector<std::vector<int>> clusters;  // in order of first declared member
  std::vector<int> isolated;
};

inline ClusterPartition clusters(const KripkeModel& m, const std::string& agent) {
  int ai = m.agent_index(agent);
  if (ai < 0) throw Error(errkind::undeclared, "undeclared agent '" + agent + "'");
  const Relation& r = m.relations[ai];
  if (!relation_transitive(r) || !relation_symmetric(r)) {
    throw Error(errkind::not_partial_equivalence,
                "relation of agent '" + agent + "' is not a partial equivalence");
  }
  ClusterPartition out;
  std::vector<bool> seen(m.worlds.size(), false);
  for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
    if (seen[w]) continue;
    std::set<int> incident;
    for (const auto& [u, v] : r) {
      if (u == w) incident.insert(v);
      if (v == w) incident.insert(u);
    }
    if (incident.empty()) {
      out.isolated.push_back(w);
      seen[w] = true;
      continue;
    }
    incident.insert(w);  // w R w follows from symmetry + transitivity
    std::vector<int> cluster(incident.begin(), incident.end());
    for (int u : cluster) seen[u] = true;
    out.clusters.push_back(std::move(cluster));
  }
  return out;
}

// --- Composition, iteration, common accessibility ---------------------------

inline Relation compose(const Relation& r1, const Relation& r2) {
  Relation out;
  for (const auto& [w, u] : r1) {
    for (const auto& [u2, v] : r2) {
      if (u2 == u) out.emplace(w, v);
    }
  }
  return out;
}

inline Relation identity_relation(int n_worlds) {
  Relation out;
  for (int w = 0; w < n_worlds; ++w) out.emplace(w, w);
  return out;
}

inline Relation iterate(const Relation& r, int k, int n_worlds) {
  Relation acc = identity_relation(n_worlds);
  for (int i = 0; i < k; ++i) acc = compose(r, acc);
  return acc;
}

// Reflexive-transitive closure of the union of all agents' relations,
// computed to fixpoint.
inline Relation common_closure(const KripkeModel& m) {
  Relation closure = identity_relation(static_cast<int>(m.worlds.size()));
  Relation mutual;
  for (const auto& r : m.relations) mutual.insert(r.begin(), r.end());
  while (true) {
    Relation next = closure;
    for (const auto& [w, u] : closure) {
      for (const auto& [u2, v] : mutual) {
        if (u2 == u) next.emplace(w, v);
      }
    }
    if (next == closure) return closure;
    closure = std::move(next);
  }
}

// Restriction to a subset of worlds; keeps names, declaration order, and the
// per-agent pairs/valuation that fall inside the subset.
inline KripkeModel restrict_to_worlds(const KripkeModel& m, const std::set<int>& keep,
                                      const std::string& new_name = "") {
  KripkeModel out = make_model(new_name.empty() ? m.name : new_name, m.agents, m.atoms);
  std::map<int, int> remap;
  for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
    if (!keep.count(w)) continue;
    remap[w] = static_cast<int>(out.worlds.size());
    out.worlds.push_back(m.worlds[w]);
  }
  for (std::size_t a = 0; a < m.agents.size(); ++a) {
    for (const auto& [u, v] : m.relations[a]) {
      if (keep.count(u) && keep.count(v)) out.relations[a].emplace(remap[u], remap[v]);
    }
  }
  for (std::size_t p = 0; p < m.atoms.size(); ++p) {
    for (int w : m.valuation[p]) {
      if (keep.count(w)) out.valuation[p].insert(remap[w]);
    }
  }
  return out;
}

// --- Agent's submodel --------------------------------------------------------

// The agent's part of a pointed model: the restriction to (R_i o R*_A)(point).
// When R_i(point) is empty the part is empty, which we report with a sentinel
// rather than an illegal zero-world model.
struct SubmodelResult {
  std::optional<KripkeModel> model;
  std::vector<int> origin;      // original index of each submodel world
  bool contains_point = false;  // the definition can reach back to the point
};

inline SubmodelResult submodel(const PointedModel& pm, const std::string& agent) {
  int ai = pm.model.agent_index(agent);
  if (ai < 0) throw Error(errkind::undeclared, "undeclared agent '" + agent + "'");
  std::set<int> first = pm.model.successors(ai, pm.point);
  if (first.empty()) return {};
  Relation star = common_closure(pm.model);
  std::set<int> keep;
  for (int w : first) {
    for (const auto& [u, v] : star) {
      if (u == w) keep.insert(v);
    }
  }
  SubmodelResult out;
  out.contains_point = keep.count(pm.point) != 0;
  out.origin.assign(keep.begin(), keep.end());
  out.model = restrict_to_worlds(pm.model, keep, pm.model.name + "^" + agent);
  return out;
}

// --- Bisimulation ------------------------------------------------------------

struct BisimResult {
  bool related = false;
  // The greatest bisimulation over original world indices (left, right).
  std::vector<std::pair<int, int>> witness;
};

namespace detail {

// Valuation agreement over the union of the two atom vocabularies; an atom
// missing from a model counts as false everywhere in it.
inline bool atoms_agree(const KripkeModel& m1, int w1, const KripkeModel& m2, int w2) {
  std::vector<std::string> pool = m1.atoms;
  for (const auto& p : m2.atoms) {
    if (std::find(pool.begin(), pool.end(), p) == pool.end()) pool.push_back(p);
  }
  for (const auto& p : pool) {
    int i1 = m1.atom_index(p), i2 = m2.atom_index(p);
    bool t1 = i1 >= 0 && m1.atom_true_at(i1, w1);
    bool t2 = i2 >= 0 && m2.atom_true_at(i2, w2);
    if (t1 != t2) return false;
  }
  return true;
}

inline std::vector<std::string> bisim_agent_scope(
    const KripkeModel& m1, const KripkeModel& m2,
    const std::optional<std::vector<std::string>>& restrict_to) {
  if (restrict_to) return *restrict_to;
  std::vector<std::string> scope = m1.agents;
  for (const auto& a : m2.agents) {
    if (std::find(scope.begin(), scope.end(), a) == scope.end()) scope.push_back(a);
  }
  return scope;
}

// Fixpoint refinement from atomic equivalence. levels[u][v] records the round
// in which the pair was removed (0 = atomically different, -1 = survives);
// the distinguishing-formula construction walks these levels.
inline std::vector<std::vector<int>> bisim_levels(
    const KripkeModel& m1, const KripkeModel& m2,
    const std::optional<std::vector<std::string>>& restrict_to) {
  int n1 = static_cast<int>(m1.worlds.size());
  int n2 = static_cast<int>(m2.worlds.size());
  std::vector<std::vector<int>> level(n1, std::vector<int>(n2, -1));
  for (int u = 0; u < n1; ++u) {
    for (int v = 0; v < n2; ++v) {
      if (!atoms_agree(m1, u, m2, v)) level[u][v] = 0;
    }
  }
  std::vector<std::string> scope = bisim_agent_scope(m1, m2, restrict_to);
  auto in_z = [&](int u, int v) { return level[u][v] < 0; };
  for (int round = 1;; ++round) {
    // Removals are collected and applied per round so that a pair removed at
    // round k provably fails the transfer conditions against Z_{k-1}.
    std::vector<std::pair<int, int>> removed;
    for (int u = 0; u < n1; ++u) {
      for (int v = 0; v < n2; ++v) {
        if (!in_z(u, v)) continue;
        bool ok = true;
        for (const auto& agent : scope) {
          int a1 = m1.agent_index(agent), a2 = m2.agent_index(agent);
          std::set<int> s1 = a1 >= 0 ? m1.successors(a1, u) : std::set<int>{};
          std::set<int> s2 = a2 >= 0 ? m2.successors(a2, v) : std::set<int>{};
          for (int u2 : s1) {  // forth
            bool matched = false;
            for (int v2 : s2) {
              if (in_z(u2, v2)) {
                matched = true;
                break;
              }
            }
            if (!matched) {
              ok = false;
              break;
            }
          }
          if (!ok) break;
          for (int v2 : s2) {  // back
            bool matched = false;
            for (int u2 : s1) {
              if (in_z(u2, v2)) {
                matched = true;
                break;
              }
            }
            if (!matched) {
              ok = false;
              break;
            }
          }
          if (!ok) break;
        }
        if (!ok) removed.emplace_back(u, v);
      }
    }
    if (removed.empty()) return level;
    for (const auto& [u, v] : removed) level[u][v] = round;
  }
}

}  // namespace detail

inline BisimResult bisimilar(const PointedModel& pm1, const PointedModel& pm2,
                             const std::optional<std::vector<std::string>>& restrict_to =
                                 std::nullopt) {
  auto level = detail::bisim_levels(pm1.model, pm2.model, restrict_to);
  BisimResult out;
  for (int u = 0; u < static_cast<int>(pm1.model.worlds.size()); ++u) {
    for (int v = 0; v < static_cast<int>(pm2.model.worlds.size()); ++v) {
      if (level[u][v] < 0) out.witness.emplace_back(u, v);
    }
  }
  out.related = level[pm1.point][pm2.point] < 0;
  return out;
}

namespace detail {

// Hennessy-Milner style witness: a formula true at u in m1 and false at v in
// m2, built by recursing on the refinement round that separated the pair.
// The modal depth is bounded by the number of refinement rounds, hence by
// |W1| * |W2|.
inline Formula distinguish(const KripkeModel& m1, int u, const KripkeModel& m2, int v,
                           const std::vector<std::vector<int>>& level,
                           const std::vector<std::vector<int>>& level_swap,
                           const std::vector<std::string>& scope);

inline Formula conj_all(std::vector<Formula> fs) {
  if (fs.empty()) return f_true();
  Formula acc = fs.front();
  for (std::size_t i = 1; i < fs.size(); ++i) acc = Formula::conjunction(acc, fs[i]);
  return acc;
}

inline Formula distinguish(const KripkeModel& m1, int u, const KripkeModel& m2, int v,
                           const std::vector<std::vector<int>>& level,
                           const std::vector<std::vector<int>>& level_swap,
                           const std::vector<std::string>& scope) {
  int k = level[u][v];
  if (k == 0) {
    std::vector<std::string> pool = m1.atoms;
    for (const auto& p : m2.atoms) {
      if (std::find(pool.begin(), pool.end(), p) == pool.end()) pool.push_back(p);
    }
    for (const auto& p : pool) {
      int i1 = m1.atom_index(p), i2 = m2.atom_index(p);
      bool t1 = i1 >= 0 && m1.atom_true_at(i1, u);
      bool t2 = i2 >= 0 && m2.atom_true_at(i2, v);
      if (t1 && !t2) return Formula::atom(p);
      if (!t1 && t2) return Formula::negation(Formula::atom(p));
    }
    throw Error("Internal", "atomic separation level without differing atom");
  }
  auto survived_before = [&](int a, int b) { return level[a][b] < 0 || level[a][b] >= k; };
  for (const auto& agent : scope) {
    int a1 = m1.agent_index(agent), a2 = m2.agent_index(agent);
    std::set<int> s1 = a1 >= 0 ? m1.successors(a1, u) : std::set<int>{};
    std::set<int> s2 = a2 >= 0 ? m2.successors(a2, v) : std::set<int>{};
    for (int u2 : s1) {  // forth failure: u2 unmatched in Z_{k-1}
      bool matched = false;
      for (int v2 : s2) {
        if (survived_before(u2, v2)) {
          matched = true;
          break;
        }
      }
      if (!matched) {
        std::vector<Formula> parts;
        for (int v2 : s2) parts.push_back(distinguish(m1, u2, m2, v2, level, level_swap, scope));
        // diamond_agent(conjunction): true at u via u2, false at v.
        return Formula::negation(Formula::believes(agent, Formula::negation(conj_all(parts))));
      }
    }
    for (int v2 : s2) {  // back failure: v2 unmatched in Z_{k-1}
      bool matched = false;
      for (int u2 : s1) {
        if (survived_before(u2, v2)) {
          matched = true;
          break;
        }
      }
      if (!matched) {
        std::vector<Formula> parts;
        for (int u2 : s1) parts.push_back(distinguish(m2, v2, m1, u2, level_swap, level, scope));
        return Formula::believes(agent, Formula::negation(conj_all(parts)));
      }
    }
  }
  throw Error("Internal", "refinement level without a failing transfer condition");
}

}  // namespace detail

// When the two points are not bisimilar, returns a formula over the shared
// agent scope that holds at pm1's point and fails at pm2's point.
inline std::optional<Formula> distinguishing_formula(
    const PointedModel& pm1, const PointedModel& pm2,
    const std::optional<std::vector<std::string>>& restrict_to = std::nullopt) {
  auto level = detail::bisim_levels(pm1.model, pm2.model, restrict_to);
  if (level[pm1.point][pm2.point] < 0) return std::nullopt;
  auto level_swap_full = detail::bisim_levels(pm2.model, pm1.model, restrict_to);
  std::vector<std::string> scope =
      detail::bisim_agent_scope(pm1.model, pm2.model, restrict_to);
  return detail::distinguish(pm1.model, pm1.point, pm2.model, pm2.point, level, level_swap_full,
                             scope);
}

}  // namespace apbu
