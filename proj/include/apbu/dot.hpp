#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "apbu/kripke.hpp"

namespace apbu {

namespace detail {

// Backslash sequences like \n are meaningful inside DOT labels, so only
// quotes get escaped.
inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// Deterministic DOT rendering: nodes in declaration order labeled with their
// true atoms, the designated world drawn with a doubled border, one edge per
// ordered pair labeled with the agents sharing it; a pair whose reverse
// carries the same agent set collapses into a single dir=both edge.
inline std::string export_dot(const KripkeModel& m, const std::string& point = "") {
  std::ostringstream out;
  out << "digraph " << detail::dot_quote(m.name) << " {\n";
  for (int w = 0; w < static_cast<int>(m.worlds.size()); ++w) {
    std::string label = m.worlds[w] + "\\n{";
    bool first = true;
    for (std::size_t p = 0; p < m.atoms.size(); ++p) {
      if (!m.atom_true_at(static_cast<int>(p), w)) continue;
      if (!first) label += ",";
      label += m.atoms[p];
      first = false;
    }
    label += "}";
    out << "  " << detail::dot_quote(m.worlds[w]) << " [label=" << detail::dot_quote(label);
    if (!point.empty() && m.worlds[w] == point) out << ", peripheries=2";
    out << "];\n";
  }
  std::map<std::pair<int, int>, std::vector<std::string>> shared;
  for (std::size_t a = 0; a < m.agents.size(); ++a) {
    for (const auto& pair : m.relations[a]) shared[pair].push_back(m.agents[a]);
  }
  for (auto& [pair, agents] : shared) std::sort(agents.begin(), agents.end());
  std::set<std::pair<int, int>> done;
  for (int u = 0; u < static_cast<int>(m.worlds.size()); ++u) {
    for (int v = 0; v < static_cast<int>(m.worlds.size()); ++v) {
      auto it = shared.find({u, v});
      if (it == shared.end() || done.count({u, v})) continue;
      std::string label;
      for (std::size_t i = 0; i < it->second.size(); ++i) {
        if (i) label += ",";
        label += it->second[i];
      }
      bool merge = false;
      if (u == v) {
        merge = true;  // a self loop is its own reverse
      } else {
        auto rev = shared.find({v, u});
        if (rev != shared.end() && rev->second == it->second && !done.count({v, u})) {
          merge = true;
          done.insert({v, u});
        }
      }
      done.insert({u, v});
      out << "  " << detail::dot_quote(m.worlds[u]) << " -> " << detail::dot_quote(m.worlds[v])
          << " [label=" << detail::dot_quote(label);
      if (merge && u != v) out << ", dir=both";
      out << "];\n";
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace apbu
