#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apbu/apriori.hpp"
#include "apbu/error.hpp"
#include "apbu/formula.hpp"
#include "apbu/kripke.hpp"
#include "apbu/semantics.hpp"

namespace apbu {

// A strategy for proposing trial/backup pairs:
//   MasterModels      — combinations of predefined alternative models,
//   ApbVariation      — masters restricted by explicit assumption formulas,
//   ApbNegatedHistory — assumptions of the form apb' & ~apb for rejected apb,
//   RelaxedFrames     — master combinations validated under relaxed frames.
struct CandidateSource {
  enum class Kind { MasterModels, ApbVariation, ApbNegatedHistory, RelaxedFrames };
  Kind kind = Kind::MasterModels;
  std::vector<KripkeModel> masters;
  std::vector<Formula> apb_pool;
  std::vector<Formula> rejected_history;
  // Labels for trace readability; default to the printed core formula.
  std::vector<std::string> apb_labels;
  std::vector<std::string> rejected_labels;

  std::string apb_label(std::size_t i) const {
    return i < apb_labels.size() ? apb_labels[i] : apb_pool[i].str();
  }
  std::string rejected_label(std::size_t i) const {
    return i < rejected_labels.size() ? rejected_labels[i] : rejected_history[i].str();
  }
};

struct SynthesisProblem {
  PointedModel target;
  std::string agent;
  std::optional<Formula> trigger;  // the announcement that caused the inconsistency
  std::vector<CandidateSource> sources;
  // A cluster is acceptable only if all its worlds agree with the designated
  // point on these atoms (what the agent can observe directly).
  std::vector<std::string> observable_atoms;
  int max_candidates = 200;
};

struct Candidate {
  std::string id;
  AprioriUpdate update;
};

struct CandidateStream {
  std::vector<Candidate> candidates;
  bool truncated = false;  // budget cut the enumeration short
};

struct TraceEntry {
  std::string candidate_id;
  std::string reject_reason;  // empty for the accepted candidate
};

struct SynthesisOutcome {
  enum class Status { Success, Exhausted };
  Status status = Status::Exhausted;
  std::optional<AprioriUpdate> update;
  std::vector<TraceEntry> trace;
  std::string note;
};

namespace detail {

inline bool valuation_equal_worlds(const KripkeModel& t, int ti, const KripkeModel& b, int bi) {
  for (const auto& p : t.atoms) {
    int tp = t.atom_index(p), bp = b.atom_index(p);
    bool tv = t.atom_true_at(tp, ti);
    bool bv = bp >= 0 && b.atom_true_at(bp, bi);
    if (tv != bv) return false;
  }
  return true;
}

// Greedy maximal matching in declaration order: each trial world takes the
// first unused propositionally-equal backup world that keeps reasoning
// coherency with the pairs chosen so far.
inline std::vector<std::pair<std::string, std::string>> derive_correspondence(
    const KripkeModel& trial, const KripkeModel& backup, const std::string& agent) {
  std::vector<std::pair<int, int>> chosen;
  std::set<int> used;
  auto reasoning_ok = [&](int ti, int bi) {
    for (const auto& other : trial.agents) {
      if (other == agent) continue;
      int ta = trial.agent_index(other), ba = backup.agent_index(other);
      if (ba < 0) return false;
      const Relation& tr = trial.relations[ta];
      const Relation& br = backup.relations[ba];
      auto check = [&](int t1, int b1, int t2, int b2) {
        return (tr.count({t1, t2}) != 0) == (br.count({b1, b2}) != 0);
      };
      if (!check(ti, bi, ti, bi)) return false;
      for (const auto& [tj, bj] : chosen) {
        if (!check(ti, bi, tj, bj) || !check(tj, bj, ti, bi)) return false;
      }
    }
    return true;
  };
  for (int ti = 0; ti < static_cast<int>(trial.worlds.size()); ++ti) {
    for (int bi = 0; bi < static_cast<int>(backup.worlds.size()); ++bi) {
      if (used.count(bi) || !valuation_equal_worlds(trial, ti, backup, bi)) continue;
      if (!reasoning_ok(ti, bi)) continue;
      chosen.emplace_back(ti, bi);
      used.insert(bi);
      break;
    }
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [ti, bi] : chosen) out.emplace_back(trial.worlds[ti], backup.worlds[bi]);
  return out;
}

// Clusters of the trial model that match the point's observable atoms,
// ordered by smallest member world name.
inline std::vector<std::vector<std::string>> matching_clusters(const KripkeModel& trial,
                                                               const SynthesisProblem& problem) {
  std::vector<std::vector<std::string>> out;
  ClusterPartition parts;
  try {
    parts = clusters(trial, problem.agent);
  } catch (const Error&) {
    return out;  // own relation does not partition: no usable cluster
  }
  const KripkeModel& target = problem.target.model;
  for (const auto& c : parts.clusters) {
    bool match = true;
    for (int w : c) {
      for (const auto& p : problem.observable_atoms) {
        int tp = trial.atom_index(p), mp = target.atom_index(p);
        bool tv = tp >= 0 && trial.atom_true_at(tp, w);
        bool mv = mp >= 0 && target.atom_true_at(mp, problem.target.point);
        if (tv != mv) {
          match = false;
          break;
        }
      }
      if (!match) break;
    }
    if (!match) continue;
    std::vector<std::string> names;
    for (int w : c) names.push_back(trial.worlds[w]);
    std::sort(names.begin(), names.end());
    out.push_back(std::move(names));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return out;
}

inline std::string cluster_label(const std::vector<std::string>& cluster) {
  std::string out = "{";
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    if (i) out += ",";
    out += cluster[i];
  }
  return out + "}";
}

// Model names must stay single tokens for .km serialization.
inline std::string squash_label(const std::string& label) {
  std::string out;
  for (char c : label) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

inline const char* source_tag(CandidateSource::Kind kind) {
  switch (kind) {
    case CandidateSource::Kind::MasterModels:
      return "H1";
    case CandidateSource::Kind::ApbVariation:
      return "H2";
    case CandidateSource::Kind::ApbNegatedHistory:
      return "H2a";
    case CandidateSource::Kind::RelaxedFrames:
      return "H4";
  }
  return "?";
}

}  // namespace detail

// Deterministic candidate enumeration: source order, then trial order, then
// backup order, then cluster order. Empty stream is possible.
inline CandidateStream generate_candidates(const SynthesisProblem& problem) {
  CandidateStream out;
  int seq = 0;
  for (std::size_t si = 0; si < problem.sources.size(); ++si) {
    const CandidateSource& source = problem.sources[si];
    for (const auto& master : source.masters) {
      if (!detail::same_vocabulary(master, problem.target.model)) {
        throw Error(errkind::vocabulary,
                    "master model '" + master.name + "' does not share the target vocabulary");
      }
    }

    std::vector<KripkeModel> trials;
    std::vector<KripkeModel> backups;
    switch (source.kind) {
      case CandidateSource::Kind::MasterModels:
      case CandidateSource::Kind::RelaxedFrames:
        trials = source.masters;
        backups = source.masters;
        break;
      case CandidateSource::Kind::ApbVariation:
      case CandidateSource::Kind::ApbNegatedHistory: {
        auto add_restriction = [&](std::vector<KripkeModel>& into, const KripkeModel& master,
                                   const Formula& f, const std::string& label) {
          KripkeModel r = restrict_by(master, f, master.name + "|" + detail::squash_label(label));
          if (!r.worlds.empty()) into.push_back(std::move(r));
        };
        if (source.kind == CandidateSource::Kind::ApbVariation) {
          for (const auto& master : source.masters) {
            for (std::size_t i = 0; i < source.apb_pool.size(); ++i) {
              add_restriction(trials, master, source.apb_pool[i], source.apb_label(i));
            }
          }
        } else {
          // new explicit beliefs of the form apb' & ~apb for each rejected apb
          for (const auto& master : source.masters) {
            for (std::size_t i = 0; i < source.apb_pool.size(); ++i) {
              for (std::size_t j = 0; j < source.rejected_history.size(); ++j) {
                add_restriction(
                    trials, master,
                    Formula::conjunction(source.apb_pool[i],
                                         Formula::negation(source.rejected_history[j])),
                    "(" + source.apb_label(i) + ") & ~(" + source.rejected_label(j) + ")");
              }
            }
          }
        }
        backups = source.masters;
        for (const auto& master : source.masters) {
          for (std::size_t i = 0; i < source.apb_pool.size(); ++i) {
            add_restriction(backups, master, source.apb_pool[i], source.apb_label(i));
          }
          for (std::size_t j = 0; j < source.rejected_history.size(); ++j) {
            add_restriction(backups, master, source.rejected_history[j],
                            source.rejected_label(j));
          }
        }
        break;
      }
    }

    bool relaxed = source.kind == CandidateSource::Kind::RelaxedFrames;
    for (const auto& trial : trials) {
      auto clusters_here = detail::matching_clusters(trial, problem);
      if (clusters_here.empty()) continue;
      for (const auto& backup : backups) {
        auto correspondence = detail::derive_correspondence(trial, backup, problem.agent);
        for (const auto& cluster : clusters_here) {
          if (static_cast<int>(out.candidates.size()) >= problem.max_candidates) {
            out.truncated = true;
            return out;
          }
          Candidate c;
          c.id = std::string(detail::source_tag(source.kind)) + ":trial=" + trial.name +
                 ",backup=" + backup.name + ",cluster=" + detail::cluster_label(cluster);
          c.update.name = "synth_" + problem.agent + "_" + std::to_string(seq++);
          c.update.agent = problem.agent;
          c.update.trial = trial;
          c.update.backup = backup;
          c.update.cluster = cluster;
          c.update.correspondence = correspondence;
          c.update.relax_trial = relaxed;
          c.update.relax_backup = relaxed;
          out.candidates.push_back(std::move(c));
        }
      }
    }
  }
  return out;
}

struct AcceptVerdict {
  bool accepted = false;
  std::string reject_reason;  // coherency | trigger-unsatisfiable | still-inconsistent
};

// An update candidate succeeds when it is coherent and actually restores the
// agent's consistency; with a triggering announcement, the announcement must
// hold at some cluster world post-update and be re-applied privately.
inline AcceptVerdict accept(const Candidate& candidate, const SynthesisProblem& problem) {
  const AprioriUpdate& u = candidate.update;
  PointedModel updated = problem.target;
  try {
    validate_update(u);
    CoherencyReport report = check_coherency(u, problem.target.model.atoms);
    if (!report.passed) return {false, "coherency"};
    updated = apply_update(problem.target, u);
  } catch (const Error&) {
    return {false, "coherency"};
  }
  Formula inconsistent = Formula::believes(problem.agent, Formula::falsum());
  if (!problem.trigger) {
    if (evaluate(updated, inconsistent)) return {false, "still-inconsistent"};
    return {true, ""};
  }
  detail::FreshNames fresh = detail::fresh_prefixes(problem.target.model, u);
  bool trigger_at_cluster = false;
  for (const auto& w : u.cluster) {
    int idx = updated.model.world_index(fresh.trial_prefix + w);
    if (idx >= 0 && evaluate(updated.model, idx, *problem.trigger)) {
      trigger_at_cluster = true;
      break;
    }
  }
  if (!trigger_at_cluster) {
    // Re-applying the announcement would empty the cluster and leave the
    // agent inconsistent again. Distinguish a trigger that holds nowhere in
    // the updated model at all (hopeless regardless of candidate).
    bool trigger_anywhere = false;
    for (int w = 0; w < static_cast<int>(updated.model.worlds.size()); ++w) {
      if (evaluate(updated.model, w, *problem.trigger)) {
        trigger_anywhere = true;
        break;
      }
    }
    return {false, trigger_anywhere ? "still-inconsistent" : "trigger-unsatisfiable"};
  }
  PointedModel reannounced =
      private_announce(updated, {problem.agent}, *problem.trigger).result;
  if (evaluate(reannounced, inconsistent)) return {false, "still-inconsistent"};
  return {true, ""};
}

inline SynthesisOutcome synthesize(const SynthesisProblem& problem) {
  int ai = problem.target.model.agent_index(problem.agent);
  if (ai < 0) throw Error(errkind::undeclared, "undeclared agent '" + problem.agent + "'");
  if (!problem.target.model.successors(ai, problem.target.point).empty()) {
    throw Error(errkind::point_not_inconsistent,
                "agent '" + problem.agent + "' is consistent at the target point");
  }
  SynthesisOutcome out;
  CandidateStream stream = generate_candidates(problem);
  for (const auto& candidate : stream.candidates) {
    AcceptVerdict verdict = accept(candidate, problem);
    out.trace.push_back({candidate.id, verdict.reject_reason});
    if (verdict.accepted) {
      out.status = SynthesisOutcome::Status::Success;
      out.update = candidate.update;
      return out;
    }
  }
  out.status = SynthesisOutcome::Status::Exhausted;
  if (stream.truncated) out.note = "candidate budget exceeded";
  return out;
}

}  // namespace apbu
