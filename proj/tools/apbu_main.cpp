// Command line front end: model checking, scenario running, update synthesis
// and DOT export for Kripke models with a-priori belief updates.
//
// Exit codes: 0 success/true, 1 false/exhausted/assertion failure,
// 2 usage or parse errors.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "apbu/corpus.hpp"
#include "apbu/dot.hpp"
#include "apbu/io.hpp"
#include "apbu/scenario.hpp"
#include "apbu/semantics.hpp"
#include "apbu/synthesis.hpp"

namespace {

constexpr int kExitTrue = 0;
constexpr int kExitFalse = 1;
constexpr int kExitError = 2;

apbu::KripkeModel load_model_file(const std::string& path) {
  apbu::FileResolver resolver;
  return apbu::parse_km(resolver.read(path), path);
}

const char* yesno(bool b) { return b ? "yes" : "no"; }

int cmd_check(const std::string& path) {
  apbu::KripkeModel m = load_model_file(path);
  apbu::RelationProfile profile = apbu::classify(m);
  std::cout << "model " << m.name << ": " << m.worlds.size() << " worlds, " << m.agents.size()
            << " agents, " << m.atoms.size() << " atoms\n";
  for (std::size_t a = 0; a < m.agents.size(); ++a) {
    const apbu::AgentRelationFlags& f = profile.per_agent[a];
    std::cout << "agent " << m.agents[a] << ": reflexive: " << yesno(f.reflexive)
              << ", transitive: " << yesno(f.transitive) << ", euclidean: " << yesno(f.euclidean)
              << ", symmetric: " << yesno(f.symmetric)
              << "; equivalence: " << yesno(f.equivalence())
              << ", partial-equivalence: " << yesno(f.partial_equivalence())
              << ", introspective: " << yesno(f.introspective()) << "\n";
  }
  std::cout << "introspective: " << yesno(profile.introspective)
            << ", quasi-epistemic: " << yesno(profile.quasi_epistemic)
            << ", epistemic: " << yesno(profile.epistemic) << "\n";
  return kExitTrue;
}

int cmd_eval(const std::string& path, const std::string& world, const std::string& formula) {
  apbu::KripkeModel m = load_model_file(path);
  apbu::PointedModel pm = apbu::pointed(std::move(m), world);
  bool value = apbu::evaluate(pm, apbu::parse_formula(formula, pm.model.agents, pm.model.atoms));
  std::cout << (value ? "true" : "false") << "\n";
  return value ? kExitTrue : kExitFalse;
}

int cmd_run(const std::string& path, bool corpus, int trunc_n, const apbu::RunOptions& options) {
  bool all_passed = true;
  if (corpus) {
    apbu::Corpus c = apbu::load_corpus(trunc_n);
    for (const auto& sc : c.scenarios) {
      apbu::RunReport report = apbu::run(sc, c.resolver, options);
      std::cout << report.render();
      all_passed &= report.passed;
    }
  } else {
    apbu::FileResolver resolver;
    apbu::Scenario sc = apbu::parse_kms(resolver.read(path), path, apbu::dir_of(path));
    apbu::RunReport report = apbu::run(sc, resolver, options);
    std::cout << report.render();
    all_passed = report.passed;
  }
  return all_passed ? kExitTrue : kExitFalse;
}

int cmd_export_dot(const std::string& path, const std::string& out_path,
                   const std::string& point) {
  apbu::KripkeModel m = load_model_file(path);
  if (!point.empty() && m.world_index(point) < 0) {
    throw apbu::Error(apbu::errkind::undeclared, "undeclared world '" + point + "'");
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw apbu::Error(apbu::errkind::io, "cannot write '" + out_path + "'");
  out << apbu::export_dot(m, point);
  std::cout << "wrote " << out_path << "\n";
  return kExitTrue;
}

int cmd_synth(const std::string& path, const std::string& emit_path, bool relaxed) {
  apbu::FileResolver resolver;
  apbu::SynthesisProblem problem =
      apbu::parse_synth(resolver.read(path), resolver, apbu::dir_of(path), path);
  if (relaxed) {
    for (auto& source : problem.sources) source.kind = apbu::CandidateSource::Kind::RelaxedFrames;
  }
  apbu::SynthesisOutcome outcome = apbu::synthesize(problem);
  for (const auto& entry : outcome.trace) {
    std::cout << (entry.reject_reason.empty() ? "accepted " : "rejected ") << entry.candidate_id;
    if (!entry.reject_reason.empty()) std::cout << " (" << entry.reject_reason << ")";
    std::cout << "\n";
  }
  if (outcome.status != apbu::SynthesisOutcome::Status::Success) {
    std::cout << "exhausted";
    if (!outcome.note.empty()) std::cout << " (" << outcome.note << ")";
    std::cout << "\n";
    return kExitFalse;
  }
  std::cout << "success: update " << outcome.update->name << " for " << outcome.update->agent
            << "\n";
  if (!emit_path.empty()) {
    std::ofstream out(emit_path, std::ios::binary);
    if (!out) throw apbu::Error(apbu::errkind::io, "cannot write '" + emit_path + "'");
    out << apbu::update_to_kmu(*outcome.update);
    std::cout << "wrote " << emit_path << "\n";
  }
  return kExitTrue;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kripke model checking with public announcements and a-priori belief updates"};
  app.require_subcommand(1);

  int trunc_n = 12;
  bool relaxed = false;
  bool gc = false;
  app.add_option("--trunc-n", trunc_n, "Truncation bound for the consecutive-numbers models");
  app.add_flag("--relaxed-frames", relaxed,
               "Require update frames to be introspective instead of quasi-epistemic");
  app.add_flag("--gc-unreachable", gc, "Prune worlds unreachable from the point after updates");

  std::string model_path, world, formula, scenario_path, out_path, point, problem_path, emit;
  bool corpus = false;

  CLI::App* check = app.add_subcommand("check", "Classify a model's relations");
  check->add_option("model", model_path)->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a formula at a world");
  eval->add_option("model", model_path)->required();
  eval->add_option("world", world)->required();
  eval->add_option("formula", formula)->required();

  CLI::App* run = app.add_subcommand("run", "Run a scenario script");
  run->add_option("scenario", scenario_path);
  run->add_flag("--corpus", corpus, "Run every bundled scenario");

  CLI::App* dot = app.add_subcommand("export-dot", "Write a model as a DOT graph");
  dot->add_option("model", model_path)->required();
  dot->add_option("out", out_path)->required();
  dot->add_option("--point", point, "World drawn with a doubled border");

  CLI::App* synth = app.add_subcommand("synth", "Search for a successful a-priori update");
  synth->add_option("problem", problem_path)->required();
  synth->add_option("--emit", emit, "Write the accepted update as a .kmu file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(check)) return cmd_check(model_path);
    if (app.got_subcommand(eval)) return cmd_eval(model_path, world, formula);
    if (app.got_subcommand(run)) {
      if (!corpus && scenario_path.empty()) {
        std::cerr << "run: need a scenario file or --corpus\n";
        return kExitError;
      }
      return cmd_run(scenario_path, corpus, trunc_n, apbu::RunOptions{relaxed, gc});
    }
    if (app.got_subcommand(dot)) return cmd_export_dot(model_path, out_path, point);
    if (app.got_subcommand(synth)) return cmd_synth(problem_path, emit, relaxed);
  } catch (const apbu::Error& e) {
    std::cerr << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
