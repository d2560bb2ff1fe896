#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apbu/apriori.hpp"
#include "apbu/error.hpp"
#include "apbu/io.hpp"
#include "apbu/semantics.hpp"
#include "apbu/synthesis.hpp"

namespace apbu {

struct Step {
  enum class Kind {
    Load,
    Point,
    AssertHolds,
    AssertFails,
    Announce,
    Private,
    Apriori,
    AprioriBatch,
    Synthesize,
    AssertWorldCount,
    ExpectError
  };
  Kind kind;
  int line = 0;
  std::string text;                 // formula text, file path, world, error kind
  std::string alias;                // Load
  std::vector<std::string> agents;  // Private
  std::vector<std::pair<std::string, std::string>> batch;  // AprioriBatch: agent -> file
  bool expect_success = true;                               // Synthesize
  int count = 0;                                            // AssertWorldCount

  std::string describe() const {
    switch (kind) {
      case Kind::Load:
        return "load " + text;
      case Kind::Point:
        return "point " + text;
      case Kind::AssertHolds:
        return "assert \"" + text + "\"";
      case Kind::AssertFails:
        return "refute \"" + text + "\"";
      case Kind::Announce:
        return "announce \"" + text + "\"";
      case Kind::Private: {
        std::string who;
        for (std::size_t i = 0; i < agents.size(); ++i) who += (i ? "," : "") + agents[i];
        return "private " + who + " \"" + text + "\"";
      }
      case Kind::Apriori:
        return "apriori " + alias + " " + text;
      case Kind::AprioriBatch:
        return "apriori-batch (" + std::to_string(batch.size()) + " agents)";
      case Kind::Synthesize:
        return "synth " + text + " expect " + (expect_success ? "success" : "exhausted");
      case Kind::AssertWorldCount:
        return "worlds " + std::to_string(count);
      case Kind::ExpectError:
        return "expect-error " + text;
    }
    return "?";
  }
};

struct Scenario {
  std::string name;
  std::string base_dir;  // directory of the scenario file, for references
  std::vector<Step> steps;
};

struct StepReport {
  int index = 0;
  std::string description;
  bool passed = false;
  std::string note;
};

struct RunReport {
  std::string name;
  std::vector<StepReport> steps;
  bool passed = false;
  std::optional<PointedModel> final_model;

  std::string render() const {
    std::ostringstream out;
    out << "scenario " << name << "\n";
    for (const auto& s : steps) {
      out << "  [" << s.index << "] " << s.description << " ... "
          << (s.passed ? "ok" : "FAIL");
      if (!s.note.empty()) out << " (" << s.note << ")";
      out << "\n";
    }
    out << (passed ? "PASS" : "FAIL") << " " << name << "\n";
    return out.str();
  }
};

inline Scenario parse_kms(const std::string& text, const std::string& where = "<kms>",
                          const std::string& base_dir = "") {
  Scenario sc;
  sc.base_dir = base_dir;
  auto lines = detail::split_lines(text);
  auto fail = [&](int lineno, const std::string& what) -> void {
    throw Error(errkind::parse, where + ":" + std::to_string(lineno) + ": " + what);
  };
  for (int lineno = 1; lineno <= static_cast<int>(lines.size()); ++lineno) {
    auto tokens = detail::tokenize_line(lines[lineno - 1], lineno, where);
    if (tokens.empty()) continue;
    const std::string& head = tokens[0];
    Step step;
    step.line = lineno;
    if (head == "scenario") {
      if (tokens.size() != 2) fail(lineno, "expected: scenario <name>");
      sc.name = tokens[1];
      continue;
    }
    if (head == "load") {
      if (tokens.size() != 4 || tokens[2] != "as") fail(lineno, "expected: load <file> as <alias>");
      step.kind = Step::Kind::Load;
      step.text = tokens[1];
      step.alias = tokens[3];
    } else if (head == "point") {
      if (tokens.size() != 2) fail(lineno, "expected: point <world>");
      step.kind = Step::Kind::Point;
      step.text = tokens[1];
    } else if (head == "assert" || head == "refute") {
      if (tokens.size() != 2) fail(lineno, "expected: " + head + " \"<formula>\"");
      step.kind = head == "assert" ? Step::Kind::AssertHolds : Step::Kind::AssertFails;
      step.text = tokens[1];
    } else if (head == "announce") {
      if (tokens.size() != 2) fail(lineno, "expected: announce \"<formula>\"");
      step.kind = Step::Kind::Announce;
      step.text = tokens[1];
    } else if (head == "private") {
      if (tokens.size() != 3) fail(lineno, "expected: private <agents> \"<formula>\"");
      step.kind = Step::Kind::Private;
      std::string who = tokens[1];
      std::size_t start = 0;
      while (start <= who.size()) {
        std::size_t comma = who.find(',', start);
        if (comma == std::string::npos) {
          step.agents.push_back(who.substr(start));
          break;
        }
        step.agents.push_back(who.substr(start, comma - start));
        start = comma + 1;
      }
      step.text = tokens[2];
    } else if (head == "apriori") {
      if (tokens.size() != 3) fail(lineno, "expected: apriori <agent> <update-file>");
      step.kind = Step::Kind::Apriori;
      step.alias = tokens[1];
      step.text = tokens[2];
    } else if (head == "apriori-batch") {
      if (tokens.size() < 2) fail(lineno, "expected: apriori-batch <agent>:<file>...");
      step.kind = Step::Kind::AprioriBatch;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        std::size_t colon = tokens[i].find(':');
        if (colon == std::string::npos) fail(lineno, "expected <agent>:<file>");
        step.batch.emplace_back(tokens[i].substr(0, colon), tokens[i].substr(colon + 1));
      }
    } else if (head == "synth") {
      if (tokens.size() != 4 || tokens[2] != "expect" ||
          (tokens[3] != "success" && tokens[3] != "exhausted")) {
        fail(lineno, "expected: synth <file> expect success|exhausted");
      }
      step.kind = Step::Kind::Synthesize;
      step.text = tokens[1];
      step.expect_success = tokens[3] == "success";
    } else if (head == "worlds") {
      if (tokens.size() != 2) fail(lineno, "expected: worlds <n>");
      step.kind = Step::Kind::AssertWorldCount;
      step.count = std::stoi(tokens[1]);
    } else if (head == "expect-error") {
      if (tokens.size() != 2) fail(lineno, "expected: expect-error <kind>");
      step.kind = Step::Kind::ExpectError;
      step.text = tokens[1];
    } else {
      fail(lineno, "unknown directive '" + head + "'");
    }
    sc.steps.push_back(std::move(step));
  }
  if (sc.name.empty()) throw Error(errkind::parse, where + ": missing 'scenario <name>' line");
  return sc;
}

struct RunOptions {
  bool relaxed_frames = false;
  bool gc_unreachable = false;
};

// Executes the steps in order against a current pointed model. An assertion
// failure aborts the remaining steps; `expect-error` arms an expectation that
// the next step raises a matching error.
inline RunReport run(const Scenario& sc, const FileResolver& resolver,
                     const RunOptions& options = {}) {
  RunReport report;
  report.name = sc.name;
  std::map<std::string, KripkeModel> loaded;
  std::optional<KripkeModel> last_loaded;
  std::optional<PointedModel> current;
  std::optional<std::string> expected_error;
  bool aborted = false;

  auto need_current = [&]() -> PointedModel& {
    if (!current) throw Error(errkind::parse, "no pointed model loaded yet");
    return *current;
  };
  auto parse_f = [&](const std::string& text) {
    const KripkeModel& m = need_current().model;
    return parse_formula(text, m.agents, m.atoms);
  };
  auto load_update = [&](const std::string& ref) {
    AprioriUpdate u = parse_kmu(resolver.read(ref, sc.base_dir), resolver,
                                join_dir(sc.base_dir, ref), ref);
    if (options.relaxed_frames) u.relax_trial = u.relax_backup = true;
    return u;
  };

  for (std::size_t i = 0; i < sc.steps.size(); ++i) {
    const Step& step = sc.steps[i];
    StepReport sr;
    sr.index = static_cast<int>(i);
    sr.description = step.describe();
    if (aborted) {
      sr.passed = false;
      sr.note = "skipped: scenario aborted";
      report.steps.push_back(sr);
      continue;
    }
    if (step.kind == Step::Kind::ExpectError) {
      expected_error = step.text;
      sr.passed = true;
      report.steps.push_back(sr);
      continue;
    }
    try {
      switch (step.kind) {
        case Step::Kind::Load: {
          KripkeModel m = parse_km(resolver.read(step.text, sc.base_dir), step.text);
          loaded[step.alias] = m;
          last_loaded = std::move(m);
          sr.passed = true;
          break;
        }
        case Step::Kind::Point: {
          if (!last_loaded) throw Error(errkind::parse, "point before any load");
          current = pointed(*last_loaded, step.text);
          sr.passed = true;
          break;
        }
        case Step::Kind::AssertHolds:
        case Step::Kind::AssertFails: {
          bool value = evaluate(need_current(), parse_f(step.text));
          bool want = step.kind == Step::Kind::AssertHolds;
          sr.passed = value == want;
          if (!sr.passed) sr.note = value ? "formula holds" : "formula fails";
          break;
        }
        case Step::Kind::Announce: {
          current = public_announce(need_current(), parse_f(step.text));
          sr.passed = true;
          break;
        }
        case Step::Kind::Private: {
          PrivateAnnounceResult res =
              private_announce(need_current(), step.agents, parse_f(step.text));
          current = res.result;
          sr.passed = true;
          for (const auto& w : res.warnings) {
            sr.note += (sr.note.empty() ? "" : "; ") + w;
          }
          break;
        }
        case Step::Kind::Apriori: {
          AprioriUpdate u = load_update(step.text);
          if (u.agent != step.alias) {
            throw Error(errkind::parse, "update file is for agent '" + u.agent +
                                            "', step names '" + step.alias + "'");
          }
          current = apply_update(need_current(), u);
          if (options.gc_unreachable) current = gc_unreachable(*current);
          sr.passed = true;
          break;
        }
        case Step::Kind::AprioriBatch: {
          UpdateBatch batch;
          for (const auto& [agent, file] : step.batch) {
            AprioriUpdate u = load_update(file);
            if (u.agent != agent) {
              throw Error(errkind::parse, "batch update file '" + file + "' is for agent '" +
                                              u.agent + "', step names '" + agent + "'");
            }
            batch[agent] = std::move(u);
          }
          current = apply_batch(need_current(), batch);
          if (options.gc_unreachable) current = gc_unreachable(*current);
          sr.passed = true;
          break;
        }
        case Step::Kind::Synthesize: {
          SynthesisProblem problem =
              parse_synth(resolver.read(step.text, sc.base_dir), resolver,
                          join_dir(sc.base_dir, step.text), step.text);
          SynthesisOutcome outcome = synthesize(problem);
          bool success = outcome.status == SynthesisOutcome::Status::Success;
          sr.passed = success == step.expect_success;
          if (!sr.passed) sr.note = success ? "unexpected success" : "unexpectedly exhausted";
          break;
        }
        case Step::Kind::AssertWorldCount: {
          int n = static_cast<int>(need_current().model.worlds.size());
          sr.passed = n == step.count;
          if (!sr.passed) sr.note = "model has " + std::to_string(n) + " worlds";
          break;
        }
        case Step::Kind::ExpectError:
          break;  // handled before the try block
      }
      if (expected_error) {
        sr.passed = false;
        sr.note = "expected error '" + *expected_error + "' did not occur";
        expected_error.reset();
      }
    } catch (const Error& e) {
      if (expected_error && *expected_error == e.kind()) {
        sr.passed = true;
        sr.note = "raised " + std::string(e.kind()) + " as expected";
        expected_error.reset();
      } else {
        sr.passed = false;
        sr.note = e.what();
      }
    }
    if (!sr.passed) aborted = true;
    report.steps.push_back(sr);
  }
  report.passed = !aborted && !expected_error;
  report.final_model = current;
  return report;
}

}  // namespace apbu
