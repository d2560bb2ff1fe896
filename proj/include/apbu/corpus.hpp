#pragma once

#include <string>
#include <vector>

#include "apbu/error.hpp"
#include "apbu/io.hpp"
#include "apbu/scenario.hpp"
#include "apbu/semantics.hpp"

#include "apbu_corpus_embedded.hpp"

namespace apbu {

// --- consecutive-numbers models ------------------------------------------------
//
// The number-line models are infinite chains in principle; we build finite
// truncations with all pair values within the window and verify that every
// asserted formula's modal depth plus the largest number it mentions stays at
// least 2 below the bound, so truncation cannot affect any corpus verdict.

enum class NumberLine { FromOne, FromZero, Integers };

namespace detail {

inline std::string num_token(int k) {
  return k < 0 ? "m" + std::to_string(-k) : std::to_string(k);
}

inline std::string num_atom(const std::string& agent, int k) {
  return "n_" + agent + "_" + num_token(k);
}

// Pairs of consecutive numbers reachable from (1,2), in chain order; the
// smaller coordinate grows by 2 at each step.
inline std::vector<std::pair<int, int>> line_pairs(NumberLine kind, int bound) {
  std::pair<int, int> start;
  switch (kind) {
    case NumberLine::FromOne:
      start = {1, 2};
      break;
    case NumberLine::FromZero:
      start = {1, 0};
      break;
    case NumberLine::Integers:
      start = {-1, -2};
      break;
  }
  std::vector<std::pair<int, int>> out{start};
  while (true) {
    auto [x, y] = out.back();
    std::pair<int, int> next = x < y ? std::make_pair(x + 2, y) : std::make_pair(x, y + 2);
    if (std::max(next.first, next.second) > bound) break;
    out.push_back(next);
  }
  return out;
}

// One atom per number per agent, shared by every consecutive-corpus model so
// that trial/backup/target vocabularies agree.
inline std::vector<std::string> consec_atoms(int bound) {
  std::vector<std::string> out;
  out.push_back(num_atom("a", -1));
  for (int k = 1; k <= bound; k += 2) out.push_back(num_atom("a", k));
  out.push_back(num_atom("b", -2));
  for (int k = 0; k <= bound; k += 2) out.push_back(num_atom("b", k));
  return out;
}

inline void add_line(KripkeModel& m, const std::vector<std::pair<int, int>>& pairs,
                     const std::string& prefix) {
  for (const auto& [x, y] : pairs) {
    m.add_world(prefix + num_token(x) + "_" + num_token(y), {num_atom("a", x), num_atom("b", y)});
  }
  for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
    std::string w1 = prefix + num_token(pairs[i].first) + "_" + num_token(pairs[i].second);
    std::string w2 = prefix + num_token(pairs[i + 1].first) + "_" + num_token(pairs[i + 1].second);
    // an edge for the agent whose own number is the same in both worlds
    m.add_pair(pairs[i].first == pairs[i + 1].first ? "a" : "b", w1, w2, true);
  }
  for (const auto& [x, y] : pairs) {
    std::string w = prefix + num_token(x) + "_" + num_token(y);
    m.add_pair("a", w, w, false);
    m.add_pair("b", w, w, false);
  }
}

}  // namespace detail

// A standalone number-line model (a candidate trial/backup/master).
inline KripkeModel consecutive_line(NumberLine kind, int bound, const std::string& name) {
  KripkeModel m = make_model(name, {"a", "b"}, detail::consec_atoms(bound));
  detail::add_line(m, detail::line_pairs(kind, bound), "w_");
  return m;
}

// The initial two-agent model: the real world (1,2) plus two disjoint private
// renditions of the situation, one per agent. Agent a starts the naturals
// from 1; agent b also counts 0.
inline KripkeModel consecutive_pointed_model(int bound) {
  KripkeModel m = make_model("consec_pointed", {"a", "b"}, detail::consec_atoms(bound));
  m.add_world("real", {detail::num_atom("a", 1), detail::num_atom("b", 2)});
  detail::add_line(m, detail::line_pairs(NumberLine::FromOne, bound), "a_");
  detail::add_line(m, detail::line_pairs(NumberLine::FromZero, bound), "b_");
  m.add_pair("a", "real", "a_1_2", false);
  m.add_pair("b", "real", "b_1_2", false);
  m.add_pair("b", "real", "b_3_2", false);
  return m;
}

namespace detail {

inline AprioriUpdate consecutive_update(NumberLine backup_kind, int bound) {
  AprioriUpdate u;
  u.agent = "b";
  u.name = backup_kind == NumberLine::FromOne ? "u_consec_from1" : "u_consec_integers";
  u.trial = consecutive_line(NumberLine::FromZero, bound, "line_from0");
  u.backup = consecutive_line(backup_kind, bound,
                              backup_kind == NumberLine::FromOne ? "line_from1"
                                                                 : "line_integers");
  u.cluster = {"w_1_2", "w_3_2"};
  for (const auto& w : u.trial.worlds) {
    if (u.backup.world_index(w) >= 0) u.correspondence.emplace_back(w, w);
  }
  return u;
}

// Largest number named by any atom occurring in the formula text.
inline int max_number_mentioned(const std::string& formula_text,
                                const std::vector<std::string>& atoms) {
  int best = 0;
  for (const auto& atom : atoms) {
    if (formula_text.find(atom) == std::string::npos) continue;
    std::string tail = atom.substr(atom.rfind('_') + 1);
    int value = tail[0] == 'm' ? std::stoi(tail.substr(1)) : std::stoi(tail);
    best = std::max(best, std::abs(value));
  }
  return best;
}

}  // namespace detail

struct Corpus {
  int trunc_n = 12;
  FileResolver resolver;
  std::vector<Scenario> scenarios;
};

// The bundled executable corpus. Static files are embedded at build time;
// the consecutive-numbers artifacts are generated for the requested
// truncation bound.
inline Corpus load_corpus(int trunc_n = 12) {
  if (trunc_n < 6) throw Error(errkind::parse, "truncation bound must be at least 6");
  Corpus c;
  c.trunc_n = trunc_n;
  for (const auto& [name, content] : corpus_embedded::kFiles) {
    c.resolver.add_virtual(std::string(name), std::string(content));
  }

  KripkeModel pointed_model = consecutive_pointed_model(trunc_n);
  c.resolver.add_virtual("models/consec_pointed.km", model_to_km(pointed_model));
  Formula announcement = parse_formula("B a n_b_2", pointed_model.agents, pointed_model.atoms);
  KripkeModel announced = restrict_by(pointed_model, announcement, "consec_announced");
  c.resolver.add_virtual("models/consec_announced.km", model_to_km(announced));
  for (NumberLine kind : {NumberLine::FromZero, NumberLine::FromOne, NumberLine::Integers}) {
    std::string name = kind == NumberLine::FromZero  ? "line_from0"
                       : kind == NumberLine::FromOne ? "line_from1"
                                                     : "line_integers";
    c.resolver.add_virtual("models/" + name + ".km",
                           model_to_km(consecutive_line(kind, trunc_n, name)));
  }
  c.resolver.add_virtual("updates/consec_update_from1.kmu",
                         update_to_kmu(detail::consecutive_update(NumberLine::FromOne, trunc_n)));
  c.resolver.add_virtual(
      "updates/consec_update_integers.kmu",
      update_to_kmu(detail::consecutive_update(NumberLine::Integers, trunc_n)));
  std::string synth_problem =
      "synth for b\n"
      "target ../models/consec_announced.km point real\n"
      "trigger \"B a n_b_2\"\n"
      "masters ../models/line_from0.km ../models/line_integers.km ../models/line_from1.km\n"
      "observable";
  for (const auto& atom : pointed_model.atoms) {
    if (atom.rfind("n_b_", 0) == 0) synth_problem += " " + atom;
  }
  synth_problem += "\nbudget 100\n";
  c.resolver.add_virtual("problems/consecutive_b.synth", synth_problem);

  const char* names[] = {"mcp_standard",       "mcp_apb2",
                         "mcp_simultaneous",   "mcp_all_clean",
                         "consecutive_success", "consecutive_failure",
                         "synthesis_mcp",      "synthesis_consecutive"};
  for (const char* name : names) {
    std::string file = std::string(name) + ".kms";
    c.scenarios.push_back(parse_kms(c.resolver.read(file), file, ""));
  }

  // Truncation soundness margin for the consecutive scenarios.
  for (const auto& sc : c.scenarios) {
    if (sc.name.rfind("consecutive", 0) != 0) continue;
    for (const auto& step : sc.steps) {
      if (step.kind != Step::Kind::AssertHolds && step.kind != Step::Kind::AssertFails &&
          step.kind != Step::Kind::Announce && step.kind != Step::Kind::Private) {
        continue;
      }
      Formula f = parse_formula(step.text, pointed_model.agents, pointed_model.atoms);
      int margin = trunc_n - f.modal_depth() -
                   detail::max_number_mentioned(step.text, pointed_model.atoms);
      if (margin < 2) {
        throw Error(errkind::parse, "corpus formula '" + step.text +
                                        "' too deep for truncation bound " +
                                        std::to_string(trunc_n));
      }
    }
  }
  return c;
}

}  // namespace apbu
