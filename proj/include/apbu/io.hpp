#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "apbu/apriori.hpp"
#include "apbu/error.hpp"
#include "apbu/kripke.hpp"
#include "apbu/synthesis.hpp"

namespace apbu {

namespace detail {

// Whitespace token scan with double-quoted strings as single tokens and `#`
// starting a comment.
inline std::vector<std::string> tokenize_line(const std::string& line, int lineno,
                                              const std::string& where) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') break;
    if (c == '"') {
      std::size_t end = line.find('"', i + 1);
      if (end == std::string::npos) {
        throw Error(errkind::parse,
                    where + ":" + std::to_string(lineno) + ": unterminated quoted string");
      }
      out.push_back(line.substr(i + 1, end - i - 1));
      i = end + 1;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
           line[i] != '#') {
      ++i;
    }
    out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  lines.push_back(current);
  return lines;
}

}  // namespace detail

// --- .km model files ---------------------------------------------------------

inline KripkeModel parse_km(const std::string& text, const std::string& where = "<km>") {
  KripkeModel m;
  bool named = false;
  auto lines = detail::split_lines(text);
  auto fail = [&](int lineno, const std::string& what) -> void {
    throw Error(errkind::parse, where + ":" + std::to_string(lineno) + ": " + what);
  };
  for (int lineno = 1; lineno <= static_cast<int>(lines.size()); ++lineno) {
    auto tokens = detail::tokenize_line(lines[lineno - 1], lineno, where);
    if (tokens.empty()) continue;
    const std::string& head = tokens[0];
    try {
      if (head == "model") {
        if (tokens.size() != 2) fail(lineno, "expected: model <name>");
        m.name = tokens[1];
        named = true;
      } else if (head == "agents") {
        if (tokens.size() < 2) fail(lineno, "expected at least one agent");
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          if (!valid_identifier(tokens[i])) fail(lineno, "invalid agent id '" + tokens[i] + "'");
          m.agents.push_back(tokens[i]);
          m.relations.push_back({});
        }
      } else if (head == "atoms") {
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          if (!valid_identifier(tokens[i])) fail(lineno, "invalid atom id '" + tokens[i] + "'");
          m.atoms.push_back(tokens[i]);
          m.valuation.push_back({});
        }
      } else if (head == "world") {
        if (tokens.size() < 2) fail(lineno, "expected: world <id> [<atom>...]");
        m.add_world(tokens[1], {tokens.begin() + 2, tokens.end()});
      } else if (head == "edge" || head == "arrow") {
        if (tokens.size() != 4) fail(lineno, "expected: " + head + " <agent> <w1> <w2>");
        m.add_pair(tokens[1], tokens[2], tokens[3], head == "edge");
      } else if (head == "reflexive") {
        if (tokens.size() != 2) fail(lineno, "expected: reflexive all|<agent>");
        for (std::size_t a = 0; a < m.agents.size(); ++a) {
          if (tokens[1] != "all" && m.agents[a] != tokens[1]) continue;
          for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
            m.relations[a].emplace(w, w);
          }
        }
        if (tokens[1] != "all" && m.agent_index(tokens[1]) < 0) {
          fail(lineno, "undeclared agent '" + tokens[1] + "'");
        }
      } else {
        fail(lineno, "unknown directive '" + head + "'");
      }
    } catch (const Error& e) {
      // errors from fail() already carry the location; wrap everything else
      if (std::string(e.what()).find(where + ":") != std::string::npos) throw;
      fail(lineno, e.what());
    }
  }
  if (!named) throw Error(errkind::parse, where + ": missing 'model <name>' line");
  if (m.agents.empty()) throw Error(errkind::parse, where + ": model declares no agents");
  if (m.worlds.empty()) throw Error(errkind::parse, where + ": model declares no worlds");
  return m;
}

inline std::string model_to_km(const KripkeModel& m) {
  std::ostringstream out;
  out << "model " << m.name << "\n";
  out << "agents";
  for (const auto& a : m.agents) out << ' ' << a;
  out << "\natoms";
  for (const auto& p : m.atoms) out << ' ' << p;
  out << "\n";
  for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
    out << "world " << m.worlds[w];
    for (std::size_t p = 0; p < m.atoms.size(); ++p) {
      if (m.atom_true_at(static_cast<int>(p), w)) out << ' ' << m.atoms[p];
    }
    out << "\n";
  }
  for (std::size_t a = 0; a < m.agents.size(); ++a) {
    for (const auto& [u, v] : m.relations[a]) {
      out << "arrow " << m.agents[a] << ' ' << m.worlds[u] << ' ' << m.worlds[v] << "\n";
    }
  }
  return out.str();
}

// --- file resolution ----------------------------------------------------------

// Files are looked up first in an in-memory table (the bundled corpus), then
// relative to the referring file's directory, then as given.
class FileResolver {
public:
  FileResolver() = default;

  void add_virtual(const std::string& name, std::string content) {
    virtual_files_[name] = std::move(content);
  }

  bool has_virtual(const std::string& name) const { return virtual_files_.count(name) != 0; }

  std::string read(const std::string& ref, const std::string& base_dir = "") const {
    auto it = virtual_files_.find(ref);
    if (it != virtual_files_.end()) return it->second;
    namespace fs = std::filesystem;
    if (!base_dir.empty()) {
      std::string joined = (fs::path(base_dir) / ref).lexically_normal().generic_string();
      it = virtual_files_.find(joined);
      if (it != virtual_files_.end()) return it->second;
    }
    std::vector<std::string> tried;
    for (const std::string& candidate :
         {base_dir.empty() ? ref : (fs::path(base_dir) / ref).string(), ref}) {
      tried.push_back(candidate);
      std::ifstream in(candidate, std::ios::binary);
      if (in) {
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
      }
    }
    std::string msg = "cannot open '" + ref + "' (tried";
    for (const auto& t : tried) msg += " " + t;
    throw Error(errkind::io, msg + ")");
  }

private:
  std::map<std::string, std::string> virtual_files_;
};

inline std::string dir_of(const std::string& path) {
  auto parent = std::filesystem::path(path).parent_path();
  return parent.string();
}

// Directory a file referenced as `ref` from `base` lives in, so that its own
// references resolve relative to it.
inline std::string join_dir(const std::string& base, const std::string& ref) {
  if (base.empty()) return dir_of(ref);
  return dir_of((std::filesystem::path(base) / ref).string());
}

// --- .kmu update files ---------------------------------------------------------

// `update <name> for <agent>` / inline `begin model` ... `end model` blocks /
// `trial <ref>` / `cluster <w>...` / `backup <ref>` / `map <tw> <bw>`.
// Model references name an inline block or a .km file.
inline AprioriUpdate parse_kmu(const std::string& text, const FileResolver& resolver,
                               const std::string& base_dir = "",
                               const std::string& where = "<kmu>") {
  AprioriUpdate u;
  std::map<std::string, KripkeModel> inline_models;
  auto lines = detail::split_lines(text);
  auto fail = [&](int lineno, const std::string& what) -> void {
    throw Error(errkind::parse, where + ":" + std::to_string(lineno) + ": " + what);
  };
  auto load_model = [&](const std::string& ref) -> KripkeModel {
    auto it = inline_models.find(ref);
    if (it != inline_models.end()) return it->second;
    return parse_km(resolver.read(ref, base_dir), ref);
  };
  bool have_update = false, have_trial = false, have_backup = false;
  for (int lineno = 1; lineno <= static_cast<int>(lines.size()); ++lineno) {
    auto tokens = detail::tokenize_line(lines[lineno - 1], lineno, where);
    if (tokens.empty()) continue;
    const std::string& head = tokens[0];
    if (head == "update") {
      if (tokens.size() != 4 || tokens[2] != "for") {
        fail(lineno, "expected: update <name> for <agent>");
      }
      u.name = tokens[1];
      u.agent = tokens[3];
      have_update = true;
    } else if (head == "begin") {
      if (tokens.size() != 2 || tokens[1] != "model") fail(lineno, "expected: begin model");
      std::string block;
      int start = lineno;
      ++lineno;
      for (;; ++lineno) {
        if (lineno > static_cast<int>(lines.size())) fail(start, "unterminated model block");
        auto inner = detail::tokenize_line(lines[lineno - 1], lineno, where);
        if (inner.size() == 2 && inner[0] == "end" && inner[1] == "model") break;
        block += lines[lineno - 1];
        block += '\n';
      }
      KripkeModel m = parse_km(block, where + " inline model");
      inline_models[m.name] = std::move(m);
    } else if (head == "trial") {
      if (tokens.size() != 2) fail(lineno, "expected: trial <model>");
      u.trial = load_model(tokens[1]);
      have_trial = true;
    } else if (head == "backup") {
      if (tokens.size() != 2) fail(lineno, "expected: backup <model>");
      u.backup = load_model(tokens[1]);
      have_backup = true;
    } else if (head == "cluster") {
      if (tokens.size() < 2) fail(lineno, "expected: cluster <world>...");
      u.cluster.assign(tokens.begin() + 1, tokens.end());
    } else if (head == "map") {
      if (tokens.size() != 3) fail(lineno, "expected: map <trial-world> <backup-world>");
      u.correspondence.emplace_back(tokens[1], tokens[2]);
    } else {
      fail(lineno, "unknown directive '" + head + "'");
    }
  }
  if (!have_update) throw Error(errkind::parse, where + ": missing 'update' line");
  if (!have_trial) throw Error(errkind::parse, where + ": missing 'trial' line");
  if (!have_backup) throw Error(errkind::parse, where + ": missing 'backup' line");
  if (u.cluster.empty()) throw Error(errkind::parse, where + ": missing 'cluster' line");
  return u;
}

// Self-contained .kmu text (models inlined); re-loadable by parse_kmu.
inline std::string update_to_kmu(const AprioriUpdate& u) {
  std::ostringstream out;
  out << "update " << u.name << " for " << u.agent << "\n";
  for (const KripkeModel* m : {&u.trial, &u.backup}) {
    out << "begin model\n" << model_to_km(*m) << "end model\n";
  }
  out << "trial " << u.trial.name << "\n";
  out << "cluster";
  for (const auto& w : u.cluster) out << ' ' << w;
  out << "\nbackup " << u.backup.name << "\n";
  for (const auto& [tw, bw] : u.correspondence) out << "map " << tw << ' ' << bw << "\n";
  return out.str();
}

// --- .synth problem files --------------------------------------------------------

inline SynthesisProblem parse_synth(const std::string& text, const FileResolver& resolver,
                                    const std::string& base_dir = "",
                                    const std::string& where = "<synth>") {
  std::string agent;
  std::optional<PointedModel> target;
  std::optional<std::string> trigger_text;
  std::vector<KripkeModel> masters;
  std::vector<std::string> apb_texts, rejected_texts, observables;
  int budget = 200;
  auto lines = detail::split_lines(text);
  auto fail = [&](int lineno, const std::string& what) -> void {
    throw Error(errkind::parse, where + ":" + std::to_string(lineno) + ": " + what);
  };
  for (int lineno = 1; lineno <= static_cast<int>(lines.size()); ++lineno) {
    auto tokens = detail::tokenize_line(lines[lineno - 1], lineno, where);
    if (tokens.empty()) continue;
    const std::string& head = tokens[0];
    if (head == "synth") {
      if (tokens.size() != 3 || tokens[1] != "for") fail(lineno, "expected: synth for <agent>");
      agent = tokens[2];
    } else if (head == "target") {
      if (tokens.size() != 4 || tokens[2] != "point") {
        fail(lineno, "expected: target <model> point <world>");
      }
      KripkeModel m = parse_km(resolver.read(tokens[1], base_dir), tokens[1]);
      target = pointed(std::move(m), tokens[3]);
    } else if (head == "trigger") {
      if (tokens.size() != 2) fail(lineno, "expected: trigger \"<formula>\"");
      trigger_text = tokens[1];
    } else if (head == "masters") {
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        masters.push_back(parse_km(resolver.read(tokens[i], base_dir), tokens[i]));
      }
    } else if (head == "apb") {
      apb_texts.insert(apb_texts.end(), tokens.begin() + 1, tokens.end());
    } else if (head == "apb-rejected") {
      rejected_texts.insert(rejected_texts.end(), tokens.begin() + 1, tokens.end());
    } else if (head == "observable") {
      observables.insert(observables.end(), tokens.begin() + 1, tokens.end());
    } else if (head == "budget") {
      if (tokens.size() != 2) fail(lineno, "expected: budget <n>");
      budget = std::stoi(tokens[1]);
    } else {
      fail(lineno, "unknown directive '" + head + "'");
    }
  }
  if (agent.empty()) throw Error(errkind::parse, where + ": missing 'synth for <agent>'");
  if (!target) throw Error(errkind::parse, where + ": missing 'target' line");

  SynthesisProblem problem;
  problem.agent = agent;
  problem.target = std::move(*target);
  problem.observable_atoms = observables;
  problem.max_candidates = budget;
  const auto& agents = problem.target.model.agents;
  const auto& atoms = problem.target.model.atoms;
  if (trigger_text) problem.trigger = parse_formula(*trigger_text, agents, atoms);

  std::vector<Formula> apb_pool, rejected;
  for (const auto& t : apb_texts) apb_pool.push_back(parse_formula(t, agents, atoms));
  for (const auto& t : rejected_texts) rejected.push_back(parse_formula(t, agents, atoms));

  // Sources, in heuristic order: explicit assumption variation first (when
  // formulas were given), then failure-driven negations, then plain master
  // combinations as the fallback.
  if (!apb_pool.empty()) {
    problem.sources.push_back({CandidateSource::Kind::ApbVariation, masters, apb_pool, rejected,
                               apb_texts, rejected_texts});
    if (!rejected.empty()) {
      problem.sources.push_back({CandidateSource::Kind::ApbNegatedHistory, masters, apb_pool,
                                 rejected, apb_texts, rejected_texts});
    }
  }
  problem.sources.push_back({CandidateSource::Kind::MasterModels, masters, {}, {}, {}, {}});
  return problem;
}

}  // namespace apbu
