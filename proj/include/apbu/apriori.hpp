#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "apbu/error.hpp"
#include "apbu/kripke.hpp"
#include "apbu/semantics.hpp"

namespace apbu {

// The self-recovery update tuple: a trial model with a designated cluster of
// actually-possible worlds, a backup model rendering how the other agents see
// the situation, and a partial correspondence identifying trial worlds with
// backup worlds.
struct AprioriUpdate {
  std::string name;
  std::string agent;
  KripkeModel trial;
  KripkeModel backup;
  std::vector<std::string> cluster;  // trial world names
  std::vector<std::pair<std::string, std::string>> correspondence;  // trial -> backup

  // Heuristic relaxation: accept merely introspective frames instead of
  // quasi-epistemic ones (the updating agent's own trial relation must still
  // partition, so the cluster stays well defined).
  bool relax_trial = false;
  bool relax_backup = false;
};

enum class CoherencyCondition { Atomic, Reasoning, Simulation };

struct CoherencyViolation {
  CoherencyCondition condition;
  std::vector<std::string> witnesses;  // offending world tuple
  std::string agent;                   // reasoning/simulation only
  std::string atom;                    // atomic only
};

struct CoherencyReport {
  bool passed = true;
  std::vector<CoherencyViolation> violations;

  std::string describe() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      switch (v.condition) {
        case CoherencyCondition::Atomic:
          out += "atomic(" + v.witnesses[0] + "->" + v.witnesses[1] + " on " + v.atom + ")";
          break;
        case CoherencyCondition::Reasoning:
          out += "reasoning(agent " + v.agent + ": " + v.witnesses[0] + "->" + v.witnesses[1] +
                 ", " + v.witnesses[2] + "->" + v.witnesses[3] + ")";
          break;
        case CoherencyCondition::Simulation:
          out += "simulation(agent " + v.agent + ": " + v.witnesses[0] + "->" + v.witnesses[1] +
                 " misses backup successor " + v.witnesses[2] + ")";
          break;
      }
    }
    return out;
  }
};

// The three coherency conditions, checked exhaustively; every violation is
// enumerated. Atomic coherency quantifies over the supplied atom vocabulary.
inline CoherencyReport check_coherency(const AprioriUpdate& u,
                                       const std::vector<std::string>& atoms) {
  CoherencyReport report;
  const KripkeModel& t = u.trial;
  const KripkeModel& b = u.backup;
  std::vector<std::pair<int, int>> pairs;  // trial index -> backup index
  for (const auto& [tw, bw] : u.correspondence) {
    int ti = t.world_index(tw), bi = b.world_index(bw);
    if (ti < 0) throw Error(errkind::undeclared, "correspondence maps unknown trial world '" + tw + "'");
    if (bi < 0) throw Error(errkind::undeclared, "correspondence maps unknown backup world '" + bw + "'");
    pairs.emplace_back(ti, bi);
  }

  // 1. atomic coherency: identified worlds are propositionally equal.
  for (const auto& [ti, bi] : pairs) {
    for (const auto& p : atoms) {
      int tp = t.atom_index(p), bp = b.atom_index(p);
      bool tv = tp >= 0 && t.atom_true_at(tp, ti);
      bool bv = bp >= 0 && b.atom_true_at(bp, bi);
      if (tv != bv) {
        report.violations.push_back(
            {CoherencyCondition::Atomic, {t.worlds[ti], b.worlds[bi]}, "", p});
      }
    }
  }

  for (const auto& agent : t.agents) {
    if (agent == u.agent) continue;
    int ta = t.agent_index(agent);
    int ba = b.agent_index(agent);
    const Relation empty_rel;
    const Relation& tr = ta >= 0 ? t.relations[ta] : empty_rel;
    const Relation& br = ba >= 0 ? b.relations[ba] : empty_rel;

    // 2. reasoning coherency: identification respects other agents' arrows.
    for (const auto& [ti, bi] : pairs) {
      for (const auto& [tj, bj] : pairs) {
        bool trial_arrow = tr.count({ti, tj}) != 0;
        bool backup_arrow = br.count({bi, bj}) != 0;
        if (trial_arrow != backup_arrow) {
          report.violations.push_back({CoherencyCondition::Reasoning,
                                       {t.worlds[ti], b.worlds[bi], t.worlds[tj], b.worlds[bj]},
                                       agent,
                                       ""});
        }
      }
    }

    // 3. simulation coherency: the trial simulates the backup.
    for (const auto& [ti, bi] : pairs) {
      for (const auto& [bu, bv] : br) {
        if (bu != bi) continue;
        bool covered = false;
        for (const auto& [tj, bj] : pairs) {
          if (bj == bv && tr.count({ti, tj})) {
            covered = true;
            break;
          }
        }
        if (!covered) {
          report.violations.push_back({CoherencyCondition::Simulation,
                                       {t.worlds[ti], b.worlds[bi], b.worlds[bv]},
                                       agent,
                                       ""});
        }
      }
    }
  }
  report.passed = report.violations.empty();
  return report;
}

namespace detail {

inline bool same_vocabulary(const KripkeModel& x, const KripkeModel& y) {
  std::set<std::string> ax(x.agents.begin(), x.agents.end());
  std::set<std::string> ay(y.agents.begin(), y.agents.end());
  std::set<std::string> px(x.atoms.begin(), x.atoms.end());
  std::set<std::string> py(y.atoms.begin(), y.atoms.end());
  return ax == ay && px == py;
}

inline void require_frame(const KripkeModel& m, const std::string& role, bool relaxed) {
  RelationProfile profile = classify(m);
  if (relaxed ? !profile.introspective : !profile.quasi_epistemic) {
    throw Error(errkind::coherency,
                role + " model '" + m.name + "' is not " +
                    (relaxed ? "introspective" : "quasi-epistemic"));
  }
}

}  // namespace detail

// Structural invariants of the update tuple itself (frames, cluster,
// correspondence well-formedness). Throws on violation.
inline void validate_update(const AprioriUpdate& u) {
  if (u.trial.agent_index(u.agent) < 0) {
    throw Error(errkind::undeclared, "updating agent '" + u.agent + "' not in trial model");
  }
  detail::require_frame(u.trial, "trial", u.relax_trial);
  detail::require_frame(u.backup, "backup", u.relax_backup);
  if (!detail::same_vocabulary(u.trial, u.backup)) {
    throw Error(errkind::vocabulary, "trial and backup models disagree on agents or atoms");
  }
  if (u.cluster.empty()) throw Error(errkind::not_a_cluster, "cluster must be nonempty");
  ClusterPartition parts = clusters(u.trial, u.agent);  // needs a partial equivalence
  std::set<std::string> want(u.cluster.begin(), u.cluster.end());
  bool found = false;
  for (const auto& c : parts.clusters) {
    std::set<std::string> names;
    for (int w : c) names.insert(u.trial.worlds[w]);
    if (names == want) {
      found = true;
      break;
    }
  }
  if (!found) {
    throw Error(errkind::not_a_cluster,
                "cluster is not a maximal " + u.agent + "-cluster of the trial model");
  }
  std::set<std::string> domain;
  for (const auto& [tw, bw] : u.correspondence) {
    if (u.trial.world_index(tw) < 0) {
      throw Error(errkind::undeclared, "correspondence domain world '" + tw + "' not in trial");
    }
    if (u.backup.world_index(bw) < 0) {
      throw Error(errkind::undeclared, "correspondence image world '" + bw + "' not in backup");
    }
    if (!domain.insert(tw).second) {
      throw Error(errkind::parse, "correspondence maps trial world '" + tw + "' twice");
    }
  }
}

namespace detail {

// Fresh block names: <agent>$trial$<world> / <agent>$backup$<world>. If the
// agent already updated once, bump a counter until the whole block is free.
struct FreshNames {
  std::string trial_prefix, backup_prefix;
};

inline FreshNames fresh_prefixes(const KripkeModel& target, const AprioriUpdate& u) {
  for (int round = 1;; ++round) {
    std::string tag = round == 1 ? "" : std::to_string(round);
    FreshNames names{u.agent + "$trial" + tag + "$", u.agent + "$backup" + tag + "$"};
    bool clash = false;
    for (const auto& w : u.cluster) {
      if (target.world_index(names.trial_prefix + w) >= 0) clash = true;
    }
    for (const auto& w : u.backup.worlds) {
      if (target.world_index(names.backup_prefix + w) >= 0) clash = true;
    }
    if (!clash) return names;
  }
}

}  // namespace detail

// The update application. New worlds are the cluster and the whole backup
// (trial worlds outside the cluster are consumed: they only feed the
// correspondence-derived arrows from the cluster into the backup).
inline PointedModel apply_update(const PointedModel& pm, const AprioriUpdate& u) {
  const KripkeModel& m = pm.model;
  validate_update(u);
  if (!detail::same_vocabulary(m, u.trial)) {
    throw Error(errkind::vocabulary,
                "update '" + u.name + "' does not share the target model's vocabulary");
  }
  RelationProfile profile = classify(m);
  if (!profile.introspective) {
    throw Error(errkind::not_introspective, "target model '" + m.name + "' is not introspective");
  }
  int ai = m.agent_index(u.agent);
  if (!m.successors(ai, pm.point).empty()) {
    throw Error(errkind::point_not_inconsistent,
                "agent '" + u.agent + "' has consistent beliefs at '" + pm.point_name() + "'");
  }
  CoherencyReport coherency = check_coherency(u, m.atoms);
  if (!coherency.passed) {
    throw Error(errkind::coherency, "update '" + u.name + "': " + coherency.describe());
  }

  detail::FreshNames fresh = detail::fresh_prefixes(m, u);
  std::string result_name = m.name + "+" + u.name;
  if (u.relax_trial || u.relax_backup) result_name += "+relaxed";
  KripkeModel out = make_model(result_name, m.agents, m.atoms);
  out.worlds = m.worlds;
  out.relations = m.relations;
  out.valuation = m.valuation;

  std::vector<int> cluster_trial;  // trial indices, in trial declaration order
  for (int w = 0; w < static_cast<int>(u.trial.worlds.size()); ++w) {
    if (std::find(u.cluster.begin(), u.cluster.end(), u.trial.worlds[w]) != u.cluster.end()) {
      cluster_trial.push_back(w);
    }
  }
  std::map<int, int> cluster_new;  // trial index -> result index
  for (int w : cluster_trial) {
    cluster_new[w] = static_cast<int>(out.worlds.size());
    out.worlds.push_back(fresh.trial_prefix + u.trial.worlds[w]);
  }
  std::map<int, int> backup_new;  // backup index -> result index
  for (int w = 0; w < static_cast<int>(u.backup.worlds.size()); ++w) {
    backup_new[w] = static_cast<int>(out.worlds.size());
    out.worlds.push_back(fresh.backup_prefix + u.backup.worlds[w]);
  }

  std::map<int, int> corr;  // trial index -> backup index
  for (const auto& [tw, bw] : u.correspondence) {
    corr[u.trial.world_index(tw)] = u.backup.world_index(bw);
  }

  for (std::size_t b = 0; b < out.agents.size(); ++b) {
    const std::string& agent = out.agents[b];
    int bb = u.backup.agent_index(agent);
    for (const auto& [x, y] : u.backup.relations[bb]) {
      out.relations[b].emplace(backup_new[x], backup_new[y]);
    }
    if (agent == u.agent) {
      for (int w : cluster_trial) out.relations[b].emplace(pm.point, cluster_new[w]);
      for (int x : cluster_trial) {
        for (int y : cluster_trial) out.relations[b].emplace(cluster_new[x], cluster_new[y]);
      }
    } else {
      int tb = u.trial.agent_index(agent);
      for (int x : cluster_trial) {
        for (const auto& [from, to] : u.trial.relations[tb]) {
          if (from != x) continue;
          auto mapped = corr.find(to);
          if (mapped != corr.end()) {
            out.relations[b].emplace(cluster_new[x], backup_new[mapped->second]);
          }
        }
      }
    }
  }

  for (std::size_t p = 0; p < out.atoms.size(); ++p) {
    const std::string& atom = out.atoms[p];
    int tp = u.trial.atom_index(atom);
    for (int w : cluster_trial) {
      if (u.trial.atom_true_at(tp, w)) out.valuation[p].insert(cluster_new[w]);
    }
    int bp = u.backup.atom_index(atom);
    for (int w : u.backup.valuation[bp]) out.valuation[p].insert(backup_new[w]);
  }

  return PointedModel{out, pm.point};
}

// A partial map from agents to updates, applied together. Individual updates
// are private and do not interfere, so sequential application in lexicographic
// agent order is order-independent up to world declaration order.
using UpdateBatch = std::map<std::string, AprioriUpdate>;

inline PointedModel apply_batch(const PointedModel& pm, const UpdateBatch& batch) {
  for (const auto& [agent, update] : batch) {
    if (update.agent != agent) {
      throw Error(errkind::parse,
                  "batch entry for '" + agent + "' holds an update for '" + update.agent + "'");
    }
    int ai = pm.model.agent_index(agent);
    if (ai < 0) throw Error(errkind::undeclared, "undeclared agent '" + agent + "'");
    if (!pm.model.successors(ai, pm.point).empty()) {
      throw Error(errkind::point_not_inconsistent,
                  "agent '" + agent + "' has consistent beliefs at '" + pm.point_name() + "'");
    }
  }
  PointedModel current = pm;
  for (const auto& [agent, update] : batch) {  // std::map iterates keys in order
    current = apply_update(current, update);
  }
  return current;
}

}  // namespace apbu
