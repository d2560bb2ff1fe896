#pragma once

#include <algorithm>
#include <iterator>
#include <set>
#include <string>
#include <vector>

#include "apbu/error.hpp"
#include "apbu/formula.hpp"
#include "apbu/kripke.hpp"

namespace apbu {

inline bool evaluate(const KripkeModel& m, int world, const Formula& f);

// M|f: the worlds where f holds, with relations and valuation restricted.
inline KripkeModel restrict_by(const KripkeModel& m, const Formula& f,
                               const std::string& new_name = "") {
  std::set<int> keep;
  for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
    if (evaluate(m, w, f)) keep.insert(w);
  }
  return restrict_to_worlds(m, keep, new_name);
}

inline bool evaluate(const KripkeModel& m, int world, const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      int p = m.atom_index(f.name());
      if (p < 0) throw Error(errkind::undeclared, "undeclared atom '" + f.name() + "'");
      return m.atom_true_at(p, world);
    }
    case Formula::Kind::False:
      return false;
    case Formula::Kind::Not:
      return !evaluate(m, world, f.left());
    case Formula::Kind::And:
      return evaluate(m, world, f.left()) && evaluate(m, world, f.right());
    case Formula::Kind::Believes: {
      int a = m.agent_index(f.name());
      if (a < 0) throw Error(errkind::undeclared, "undeclared agent '" + f.name() + "'");
      Formula body = f.left();
      for (int u : m.successors(a, world)) {
        if (!evaluate(m, u, body)) return false;
      }
      return true;
    }
    case Formula::Kind::Announced: {
      // [phi]psi: either phi fails here, or psi holds here in M|phi.
      Formula ann = f.left();
      if (!evaluate(m, world, ann)) return true;
      KripkeModel restricted = restrict_by(m, ann);
      return evaluate(restricted, restricted.world_index(m.worlds[world]), f.right());
    }
  }
  return false;
}

inline bool evaluate(const PointedModel& pm, const Formula& f) {
  return evaluate(pm.model, pm.point, f);
}

// Public announcement of f. The point must survive.
inline PointedModel public_announce(const PointedModel& pm, const Formula& f) {
  if (!evaluate(pm, f)) {
    throw Error(errkind::announcement_false,
                "announcement '" + f.str() + "' is false at the designated world '" +
                    pm.point_name() + "'");
  }
  KripkeModel restricted = restrict_by(pm.model, f);
  return PointedModel{restricted, restricted.world_index(pm.point_name())};
}

struct PrivateAnnounceResult {
  PointedModel result;
  std::vector<std::string> warnings;
};

// Announcement applied only within the listed agents' parts of the model.
// Each agent treats its part (the agent's submodel) as a standalone model:
// worlds of the part where f fails are removed from the full model, along
// with every relation pair incident to them. The designated point is never
// removed; nothing outside the listed parts changes.
inline PrivateAnnounceResult private_announce(const PointedModel& pm,
                                              const std::vector<std::string>& agents,
                                              const Formula& f) {
  PrivateAnnounceResult out{pm, {}};
  std::vector<std::set<int>> parts;
  std::set<int> doomed;
  for (const auto& agent : agents) {
    SubmodelResult part = submodel(pm, agent);
    if (!part.model) {
      throw Error(errkind::empty_submodel, "agent '" + agent + "' has an empty part");
    }
    std::set<int> members(part.origin.begin(), part.origin.end());
    for (const auto& prev : parts) {
      std::set<int> overlap;
      std::set_intersection(prev.begin(), prev.end(), members.begin(), members.end(),
                            std::inserter(overlap, overlap.begin()));
      if (!overlap.empty()) {
        out.warnings.push_back("parts of listed agents overlap; union of removals applied");
        break;
      }
    }
    parts.push_back(members);
    for (int local = 0; local < static_cast<int>(part.model->worlds.size()); ++local) {
      if (evaluate(*part.model, local, f)) continue;
      int original = part.origin[local];
      if (original == pm.point) {
        out.warnings.push_back("designated world fails '" + f.str() + "' inside agent '" +
                               agent + "' part; exempted from removal");
        continue;
      }
      doomed.insert(original);
    }
  }
  std::set<int> keep;
  for (int w = 0; w < static_cast<int>(pm.model.worlds.size()); ++w) {
    if (!doomed.count(w)) keep.insert(w);
  }
  KripkeModel reduced = restrict_to_worlds(pm.model, keep);
  out.result = PointedModel{reduced, reduced.world_index(pm.point_name())};
  return out;
}

// Optional post-pass: drop worlds unreachable from the point (any agent,
// any number of steps). Off by default; stale update blocks stay otherwise.
inline PointedModel gc_unreachable(const PointedModel& pm) {
  Relation star = common_closure(pm.model);
  std::set<int> keep{pm.point};
  for (const auto& [u, v] : star) {
    if (u == pm.point) keep.insert(v);
  }
  KripkeModel reduced = restrict_to_worlds(pm.model, keep);
  return PointedModel{reduced, reduced.world_index(pm.point_name())};
}

}  // namespace apbu
