#include <catch_amalgamated.hpp>

#include "apbu/apriori.hpp"
#include "apbu/corpus.hpp"
#include "apbu/semantics.hpp"
#include "helpers.hpp"

using namespace apbu;
using test_helpers::Rng;

namespace {

Formula parse_on(const KripkeModel& m, const std::string& text) {
  return parse_formula(text, m.agents, m.atoms);
}

PointedModel mcp_start() {
  return pointed(test_helpers::corpus_model("models/mcp_apb2_pointed.km"), "Areal");
}

}  // namespace

TEST_CASE("coherency holds for the bundled updates") {
  AprioriUpdate u = test_helpers::corpus_update("updates/mcp_update_a.kmu");
  CHECK(check_coherency(u, u.trial.atoms).passed);
  CHECK_NOTHROW(validate_update(u));

  AprioriUpdate consec = test_helpers::corpus_update("updates/consec_update_from1.kmu");
  CHECK(check_coherency(consec, consec.trial.atoms).passed);
  CHECK_NOTHROW(validate_update(consec));

  AprioriUpdate integers = test_helpers::corpus_update("updates/consec_update_integers.kmu");
  CHECK(check_coherency(integers, integers.trial.atoms).passed);
}

TEST_CASE("rewired correspondence violates atomic coherency") {
  AprioriUpdate u = test_helpers::corpus_update("updates/consec_update_from1.kmu");
  for (auto& [tw, bw] : u.correspondence) {
    if (tw == "w_1_2") bw = "w_3_2";  // identify (1,2) with (3,2)
  }
  CoherencyReport report = check_coherency(u, u.trial.atoms);
  CHECK_FALSE(report.passed);
  bool atomic_on_a_number = false;
  for (const auto& v : report.violations) {
    if (v.condition == CoherencyCondition::Atomic && v.atom.rfind("n_a_", 0) == 0) {
      atomic_on_a_number = true;
    }
  }
  CHECK(atomic_on_a_number);
}

TEST_CASE("every coherency condition is reported with witnesses") {
  // Trial: two b-connected worlds; backup: disconnected copies with a
  // valuation flip. All three conditions fail somewhere.
  KripkeModel trial = make_model("t", {"a", "b"}, {"p"});
  trial.add_world("t0", {"p"});
  trial.add_world("t1");
  trial.add_pair("a", "t0", "t0", false);
  trial.add_pair("b", "t0", "t1", true);
  trial.add_pair("b", "t0", "t0", false);
  trial.add_pair("b", "t1", "t1", false);
  KripkeModel backup = make_model("k", {"a", "b"}, {"p"});
  backup.add_world("k0");  // flips p
  backup.add_world("k1");
  backup.add_world("k2");  // image of nothing
  backup.add_pair("b", "k1", "k1", false);
  backup.add_pair("b", "k1", "k2", false);
  AprioriUpdate u;
  u.agent = "a";
  u.trial = trial;
  u.backup = backup;
  u.cluster = {"t0"};
  u.correspondence = {{"t0", "k0"}, {"t1", "k1"}};
  CoherencyReport report = check_coherency(u, trial.atoms);
  REQUIRE_FALSE(report.passed);
  bool atomic = false, reasoning = false, simulation = false;
  for (const auto& v : report.violations) {
    atomic |= v.condition == CoherencyCondition::Atomic && v.atom == "p";
    // t0 R_b t1 in the trial but k0 !R_b k1 in the backup
    reasoning |= v.condition == CoherencyCondition::Reasoning && v.agent == "b";
    // k1 R_b k2, but no mapped trial successor of t1 lands on k2
    simulation |= v.condition == CoherencyCondition::Simulation && v.witnesses[2] == "k2";
  }
  CHECK(atomic);
  CHECK(reasoning);
  CHECK(simulation);
}

TEST_CASE("the muddy-children update reproduces the expected ten-world model") {
  PointedModel pm = mcp_start();
  CHECK(evaluate(pm, parse_on(pm.model, "B a false")));
  PointedModel out = apply_update(pm, test_helpers::corpus_update("updates/mcp_update_a.kmu"));
  REQUIRE(out.model.worlds.size() == 10);
  CHECK(out.point_name() == "Areal");

  PointedModel expected = test_helpers::expected_mcp_result();
  CHECK(same_model_unordered(out.model, expected.model));
  CHECK(bisimilar(out, expected).related);

  for (const char* claim : {
           "~B a false",
           "B a (ma & ~mb & ~mc)",
           "B b (ma & mb & ~mc)",
           "B c (ma & ~mb & mc)",
           "B a B b (ma & mb & ~mc)",
           "B a B c (ma & ~mb & mc)",
           "B b B a (ma & mb & ~mc)",
           "B c B a (ma & ~mb & mc)",
       }) {
    CAPTURE(claim);
    CHECK(evaluate(out, parse_on(out.model, claim)));
  }
}

TEST_CASE("the consecutive-numbers update grafts the expected arrows") {
  KripkeModel n = test_helpers::corpus_model("models/consec_pointed.km");
  PointedModel pm = pointed(n, "real");
  pm = public_announce(pm, parse_on(n, "B a n_b_2"));
  PointedModel out =
      apply_update(pm, test_helpers::corpus_update("updates/consec_update_from1.kmu"));

  auto has = [&](const std::string& agent, const std::string& u, const std::string& v) {
    int a = out.model.agent_index(agent);
    return out.model.relations[a].count(
               {out.model.world_index(u), out.model.world_index(v)}) == 1;
  };
  CHECK(has("b", "real", "b$trial$w_1_2"));
  CHECK(has("b", "real", "b$trial$w_3_2"));
  CHECK(has("b", "b$trial$w_1_2", "b$trial$w_3_2"));
  // correspondence-driven a-arrows: (1,2) sees only its twin; (3,2) sees two
  CHECK(has("a", "b$trial$w_1_2", "b$backup$w_1_2"));
  CHECK_FALSE(has("a", "b$trial$w_1_2", "b$backup$w_1_0"));  // (1,0) is unmapped
  CHECK(has("a", "b$trial$w_3_2", "b$backup$w_3_2"));
  CHECK(has("a", "b$trial$w_3_2", "b$backup$w_3_4"));
  CHECK_FALSE(evaluate(out, parse_on(out.model, "B b false")));
}

TEST_CASE("update preconditions are enforced") {
  AprioriUpdate u = test_helpers::corpus_update("updates/mcp_update_a.kmu");

  // consistent agent at the point
  KripkeModel m0 = test_helpers::corpus_model("models/m0.km");
  try {
    apply_update(pointed(m0, "A"), u);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::point_not_inconsistent);
  }

  // non-introspective target
  KripkeModel bad = make_model("bad", {"a", "b", "c"}, {"ma", "mb", "mc"});
  bad.add_world("v");
  bad.add_world("w");
  bad.add_world("x");
  bad.add_pair("b", "v", "w", false);
  bad.add_pair("b", "w", "x", false);  // not transitive
  try {
    apply_update(pointed(bad, "v"), u);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::not_introspective);
  }

  // coherency failure
  AprioriUpdate broken = u;
  broken.correspondence[0].second = "AB";  // ABC identified with AB
  try {
    apply_update(mcp_start(), broken);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::coherency);
  }

  // non-maximal cluster
  AprioriUpdate partial = test_helpers::corpus_update("updates/mcp_update_b.kmu");
  partial.cluster = {"AB"};  // proper subset of the {A, AB} cluster
  try {
    validate_update(partial);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::not_a_cluster);
  }

  // vocabulary mismatch
  KripkeModel other = make_model("other", {"a", "b"}, {"ma"});
  other.add_world("v");
  try {
    apply_update(PointedModel{other, 0}, u);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::vocabulary);
  }
}

TEST_CASE("batch application and order independence") {
  PointedModel pm = mcp_start();
  pm = apply_update(pm, test_helpers::corpus_update("updates/mcp_update_a.kmu"));
  pm = public_announce(pm, parse_on(pm.model, "(B a ma | B a ~ma) & (B b mb | B b ~mb) & "
                                              "(B c mc | B c ~mc)"));
  AprioriUpdate ub = test_helpers::corpus_update("updates/mcp_update_b.kmu");
  AprioriUpdate uc = test_helpers::corpus_update("updates/mcp_update_c.kmu");

  UpdateBatch batch{{"b", ub}, {"c", uc}};
  PointedModel batched = apply_batch(pm, batch);
  CHECK(batched.model.worlds.size() == 14);

  // manual application in the opposite order gives the same model
  PointedModel manual = apply_update(apply_update(pm, uc), ub);
  CHECK(same_model_unordered(batched.model, manual.model));

  // the definition adds an a-arrow from the cluster world AB into the backup
  int ra = batched.model.agent_index("a");
  CHECK(batched.model.relations[ra].count({batched.model.world_index("b$trial$AB"),
                                           batched.model.world_index("b$backup$AB")}) == 1);

  CHECK(same_model_unordered(apply_batch(pm, {}).model, pm.model));  // empty batch
}

TEST_CASE("all-clean batch reproduces the false-belief equilibrium") {
  PointedModel pm = pointed(test_helpers::corpus_model("models/mcp_all_clean.km"), "real0");
  UpdateBatch batch{{"a", test_helpers::corpus_update("updates/mcp_update_a.kmu")},
                    {"b", test_helpers::corpus_update("updates/mcp_allclean_b.kmu")},
                    {"c", test_helpers::corpus_update("updates/mcp_allclean_c.kmu")}};
  PointedModel out = apply_batch(pm, batch);
  CHECK(evaluate(out, parse_on(out.model,
                               "B a (ma & B b mb & B c mc) & B b (mb & B a ma & B c mc) & "
                               "B c (mc & B a ma & B b mb)")));
}

TEST_CASE("batch entries must match their keys and preconditions") {
  PointedModel pm = mcp_start();
  UpdateBatch wrong{{"b", test_helpers::corpus_update("updates/mcp_update_c.kmu")}};
  CHECK_THROWS_AS(apply_batch(pm, wrong), Error);

  // b is consistent at the start, so a batch for b must be refused up front
  UpdateBatch premature{{"b", test_helpers::corpus_update("updates/mcp_update_b.kmu")}};
  try {
    apply_batch(pm, premature);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == errkind::point_not_inconsistent);
  }
}

TEST_CASE("repeated updates by the same agent get fresh world names") {
  PointedModel pm = mcp_start();
  AprioriUpdate u = test_helpers::corpus_update("updates/mcp_update_a.kmu");
  pm = apply_update(pm, u);
  // a private announcement false exactly at the cluster empties a's beliefs
  // while the stale backup block stays in the model
  pm = private_announce(pm, {"a"}, parse_on(pm.model, "mb | mc")).result;
  REQUIRE(evaluate(pm, parse_on(pm.model, "B a false")));
  REQUIRE(pm.model.world_index("a$backup$ABC") >= 0);
  PointedModel again = apply_update(pm, u);
  CHECK(again.model.world_index("a$trial2$A") >= 0);
  CHECK(again.model.world_index("a$backup2$ABC") >= 0);
  CHECK_FALSE(evaluate(again, parse_on(again.model, "B a false")));
}

TEST_CASE("relaxed frames accept introspective backups") {
  // backup with a one-way b-arrow: introspective but not quasi-epistemic
  KripkeModel trial = make_model("t", {"a", "b"}, {"p"});
  trial.add_world("t0", {"p"});
  trial.add_pair("a", "t0", "t0", false);
  KripkeModel backup = make_model("k", {"a", "b"}, {"p"});
  backup.add_world("k0");
  backup.add_world("k1");
  backup.add_pair("b", "k0", "k1", false);
  backup.add_pair("b", "k1", "k1", false);
  AprioriUpdate u;
  u.name = "relax";
  u.agent = "a";
  u.trial = trial;
  u.backup = backup;
  u.cluster = {"t0"};

  KripkeModel target = make_model("tgt", {"a", "b"}, {"p"});
  target.add_world("v");
  PointedModel pm = pointed(target, "v");

  CHECK_THROWS_AS(apply_update(pm, u), Error);
  u.relax_backup = true;
  PointedModel out = apply_update(pm, u);
  CHECK(classify(out.model).introspective);
  CHECK(out.model.name.find("relaxed") != std::string::npos);
}

// ---- theorem-shaped property suites (small editions; the acceptance binary
// runs the full-size ones) ----------------------------------------------------

TEST_CASE("update consequences on random valid instances") {
  Rng rng(20240902);
  int runs = 0;
  while (runs < 120) {
    PointedModel target = test_helpers::random_target(rng, "a");
    AprioriUpdate u = test_helpers::random_update(rng, target, "a");
    REQUIRE(check_coherency(u, target.model.atoms).passed);
    REQUIRE(evaluate(target, Formula::believes("a", Formula::falsum())));
    PointedModel out = apply_update(target, u);
    ++runs;

    // the result is introspective
    REQUIRE(classify(out.model).introspective);
    // propositional truth at the point is untouched
    for (int k = 0; k < 5; ++k) {
      Formula prop = test_helpers::random_formula(rng, 2, target.model.atoms, {});
      REQUIRE(evaluate(target, prop) == evaluate(out, prop));
    }
    // other agents' beliefs at the point are untouched
    for (const auto& agent : target.model.agents) {
      if (agent == "a") continue;
      for (int k = 0; k < 5; ++k) {
        Formula phi =
            test_helpers::random_formula(rng, 2, target.model.atoms, target.model.agents);
        Formula belief = Formula::believes(agent, phi);
        REQUIRE(evaluate(target, belief) == evaluate(out, belief));
      }
    }
    // the agent's own beliefs become consistent
    REQUIRE_FALSE(evaluate(out, Formula::believes("a", Formula::falsum())));
  }
}

TEST_CASE("post-update beliefs are determined by cluster and backup") {
  Rng rng(555);
  int runs = 0;
  while (runs < 120) {
    PointedModel target = test_helpers::random_target(rng, "a");
    AprioriUpdate u = test_helpers::random_update(rng, target, "a");
    PointedModel out = apply_update(target, u);
    ++runs;
    detail::FreshNames fresh = detail::fresh_prefixes(target.model, u);

    // factual and introspective beliefs come from the cluster alone
    for (int k = 0; k < 6; ++k) {
      Formula psi = test_helpers::random_formula(rng, 2, target.model.atoms, {"a"});
      bool believes_psi = evaluate(out, Formula::believes("a", psi));
      bool cluster_all = true, cluster_some_believes = false;
      for (const auto& w : u.cluster) {
        int tw = u.trial.world_index(w);
        cluster_all = cluster_all && evaluate(u.trial, tw, psi);
        cluster_some_believes =
            cluster_some_believes || evaluate(u.trial, tw, Formula::believes("a", psi));
      }
      REQUIRE(believes_psi == cluster_all);
      REQUIRE(believes_psi == cluster_some_believes);
    }

    // every formula keeps its value at backup worlds
    for (int k = 0; k < 6; ++k) {
      Formula phi = test_helpers::random_formula(rng, 2, target.model.atoms,
                                                 target.model.agents, true);
      int bw = rng.pick(0, static_cast<int>(u.backup.worlds.size()) - 1);
      int copy = out.model.world_index(fresh.backup_prefix + u.backup.worlds[bw]);
      REQUIRE(copy >= 0);
      REQUIRE(evaluate(u.backup, bw, phi) == evaluate(out.model, copy, phi));
    }
  }
}

TEST_CASE("announcement-triggered recovery stays consistent") {
  Rng rng(808);
  int non_vacuous = 0;
  for (int i = 0; i < 200; ++i) {
    PointedModel target = test_helpers::random_target(rng, "a");
    AprioriUpdate u = test_helpers::random_update(rng, target, "a");
    PointedModel out = apply_update(target, u);
    Formula trigger = test_helpers::random_formula(rng, 1, target.model.atoms, {"a"});
    detail::FreshNames fresh = detail::fresh_prefixes(target.model, u);
    bool some_cluster_world = false;
    for (const auto& w : u.cluster) {
      int idx = out.model.world_index(fresh.trial_prefix + w);
      if (evaluate(out.model, idx, trigger)) some_cluster_world = true;
    }
    if (!some_cluster_world) continue;
    ++non_vacuous;
    PointedModel after = private_announce(out, {"a"}, trigger).result;
    REQUIRE_FALSE(evaluate(after, Formula::believes("a", Formula::falsum())));
  }
  CHECK(non_vacuous > 60);
}

TEST_CASE("re-announcing to a believed-inconsistent agent changes nothing") {
  Rng rng(1618);
  int non_vacuous = 0;
  for (int i = 0; i < 300 && non_vacuous < 60; ++i) {
    PointedModel target = test_helpers::random_target(rng, "a");
    if (target.model.agents.size() < 2) continue;
    AprioriUpdate u = test_helpers::random_update(rng, target, "a", true, "b");
    PointedModel out = apply_update(target, u);
    Formula b_inconsistent =
        Formula::believes("a", Formula::believes("b", Formula::falsum()));
    if (!evaluate(out, b_inconsistent)) continue;
    ++non_vacuous;
    Formula phi = test_helpers::random_formula(rng, 1, target.model.atoms, {"a", "b"});
    Formula statement = Formula::believes("b", phi);
    PointedModel after = private_announce(out, {"a"}, statement).result;
    for (int k = 0; k < 8; ++k) {
      Formula psi = test_helpers::random_formula(rng, 2, target.model.atoms, {"a", "b"});
      Formula claim = Formula::believes("a", psi);
      REQUIRE(evaluate(out, claim) == evaluate(after, claim));
    }
  }
  CHECK(non_vacuous >= 60);
}
