#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fragmenta/app/campaign.hpp"
#include "fragmenta/app/server.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/qlearn/rewards.hpp"

using namespace fragmenta;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kChainExtenders = FRAGMENTA_SOURCE_DIR "/data/chain_extenders.smi";

std::string scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("fragmenta_app_" + name);
  fs::remove_all(p);
  return p.string();
}

app::RunConfig small_config(tuning::Mode mode = tuning::Mode::AgentAgent) {
  app::RunConfig c;
  c.seed = 11;
  c.data.train = kChainExtenders;
  c.training.epochs = 3;
  c.training.samples_per_epoch = 60;
  c.tuning.mode = mode;
  c.tuning.round_samples = 200;
  c.tuning.top_n = 20;
  c.tuning.epochs_per_round = 1;
  return c;
}

obj::ObjectiveSpec zero_lambda_spec() {
  auto spec = obj::internal_objective();
  for (auto& t : spec.terms) t.lambda = 0.0;
  obj::ObjectiveTerm d;
  d.name = obj::kDiversityTerm;
  d.kind = obj::TermKind::DiversityGroup;
  d.lambda = 0.0;
  spec.terms.push_back(d);
  return spec;
}

std::string feedback(const std::string& id, const json& items) {
  return json{{"id", id}, {"round", 1}, {"author", "human"}, {"items", items}}.dump();
}

}  // namespace

TEST_CASE("config: round trip, unknown keys, relative paths") {
  const auto c = small_config();
  const auto back = app::config_from_json(app::to_json(c));
  CHECK(back.digest() == c.digest());
  CHECK(app::to_json(back) == app::to_json(c));

  json j = app::to_json(c);
  j["training"]["epohcs"] = 3;
  CHECK_THROWS_AS(app::config_from_json(j), app::ConfigError);

  json rel{{"data", {{"train", "sets/x.smi"}}}};
  CHECK(fs::path(app::config_from_json(rel, "/base").data.train) == fs::path("/base/sets/x.smi"));

  json none{{"objective", "none"}};
  CHECK(app::config_from_json(none).objective.terms.empty());
  json bad_lambda{{"objective", {{"version", 0}, {"terms", {{{"name", "mw_penalty"}, {"kind", "property_penalty"},
                                                             {"lambda", -1.0}, {"property", "mol_weight"},
                                                             {"threshold", 500}}}}}}};
  CHECK_THROWS(app::config_from_json(bad_lambda));

  // The digest tracks training settings only.
  auto served = c;
  served.serve.port = 9999;
  served.tuning.top_n = 7;
  CHECK(served.digest() == c.digest());
  auto reseeded = c;
  reseeded.seed = 12;
  CHECK(reseeded.digest() != c.digest());
}

TEST_CASE("epoch batch: whole dataset when small, seeded sample otherwise") {
  auto c = small_config();
  const auto all = app::epoch_batch(11, c, 1, 0);
  CHECK(all.size() == 11);
  c.training.minibatch = 4;
  const auto a = app::epoch_batch(11, c, 1, 0);
  CHECK(a.size() == 4);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  CHECK(a == app::epoch_batch(11, c, 1, 0));
  bool differs = false;
  for (int e = 1; e < 8; ++e) differs |= app::epoch_batch(11, c, 1, e) != a;
  CHECK(differs);
}

TEST_CASE("train_epoch on the 11 chain extenders covers every molecule") {
  const auto c = small_config();
  const auto data = chem::load_molecules(kChainExtenders);
  REQUIRE(data.size() == 11);
  auto state = app::RunState::fresh(c);
  app::train_epoch(state, data, c);
  REQUIRE(state.metrics.size() == 1);
  CHECK(state.metrics[0].batch_molecules == 11);
  CHECK(state.metrics[0].epoch == 1);
  CHECK(state.metrics[0].samples == 60);
  CHECK(state.vocab.size() > 0);
  CHECK(state.q.size() > 0);
  CHECK(state.epoch == 1);
}

TEST_CASE("training is deterministic and seed-dependent") {
  const auto c = small_config();
  const auto data = chem::load_molecules(kChainExtenders);
  auto a = app::RunState::fresh(c), b = app::RunState::fresh(c);
  for (int e = 0; e < 3; ++e) {
    app::train_epoch(a, data, c);
    app::train_epoch(b, data, c);
  }
  CHECK(a.digest() == b.digest());
  CHECK(a.q == b.q);

  auto other = c;
  other.seed = 99;
  auto d = app::RunState::fresh(other);
  for (int e = 0; e < 3; ++e) app::train_epoch(d, data, other);
  CHECK(d.digest() != a.digest());

  // Metric history is append-only with consecutive epoch numbers.
  for (std::size_t i = 0; i < a.metrics.size(); ++i) CHECK(a.metrics[i].epoch == static_cast<int>(i) + 1);
}

TEST_CASE("all-zero lambdas: Q changes only through reconstruction rewards") {
  auto c = small_config();
  c.objective = zero_lambda_spec();
  const auto data = chem::load_molecules(kChainExtenders);
  auto state = app::RunState::fresh(c);
  app::train_epoch(state, data, c);  // non-empty table for the second epoch

  // Steps 1 to 4 by hand, without sampling or scoring.
  auto expected = state;
  const auto epoch = static_cast<std::uint64_t>(expected.epoch);
  std::vector<frag::Decomposition> decomps;
  for (std::size_t i : app::epoch_batch(data.size(), c, c.seed, expected.epoch)) {
    frag::DecompositionConfig dc = c.decomposition;
    dc.rng_seed = derive_seed(c.seed, app::kStreamDecompose, epoch, i);
    decomps.push_back(frag::decompose(data[i], expected.q, dc));
  }
  for (const auto& d : decomps) expected.vocab.add(d);
  qlearn::insert_fragments(expected.q, expected.vocab);
  for (const auto& d : decomps) qlearn::reward_reconstruction(expected.q, d, c.training.reconstruction_reward);

  app::train_epoch(state, data, c);
  CHECK(state.q == expected.q);

  // A nonzero objective does move the table.
  auto live = c;
  live.objective = obj::internal_objective();
  auto s2 = app::RunState::fresh(live);
  app::train_epoch(s2, data, live);
  app::train_epoch(s2, data, live);
  CHECK_FALSE(s2.q == expected.q);
}

TEST_CASE("resume: persisted and restored state continues bit-identically") {
  const auto c = small_config();
  const auto data = chem::load_molecules(kChainExtenders);
  auto straight = app::RunState::fresh(c);
  for (int e = 0; e < 4; ++e) app::train_epoch(straight, data, c);

  const auto dir = scratch_dir("resume");
  auto first = app::RunState::fresh(c);
  for (int e = 0; e < 2; ++e) app::train_epoch(first, data, c);
  first.persist(dir);
  CHECK(fs::exists(fs::path(dir) / "metrics.csv"));
  auto resumed = app::RunState::restore(dir);
  CHECK(resumed.digest() == first.digest());
  for (int e = 0; e < 2; ++e) app::train_epoch(resumed, data, c);
  CHECK(resumed.digest() == straight.digest());
  fs::remove_all(dir);
}

TEST_CASE("campaign: agent-agent rounds close themselves") {
  const auto dir = scratch_dir("agent");
  auto c = small_config();
  c.tuning.persona.diversity_floor = 0.99;  // guarantees feedback each round
  app::Campaign campaign(c, dir);
  campaign.train(2);
  const auto& r = campaign.open_round();
  CHECK(r.number == 1);
  CHECK(r.status == app::RoundStatus::Closed);
  CHECK(r.generated == 200);
  CHECK(r.top.size() == 20);
  CHECK(r.version_after == r.version_before + 1);
  for (std::size_t i = 1; i < r.top.size(); ++i) CHECK(r.top[i - 1].score >= r.top[i].score);
  CHECK(fs::exists(fs::path(dir) / "rounds/1/batch.smi"));
  CHECK(fs::exists(fs::path(dir) / "rounds/1/top.json"));
  CHECK(campaign.state().epoch == 2 + c.tuning.epochs_per_round);

  campaign.run_agent_rounds(2);
  CHECK(campaign.rounds().size() == 3);
  CHECK(campaign.session().spec().version == 3);

  // Audit completeness: one history entry per version, each naming its source.
  const auto& history = campaign.session().kb().history();
  REQUIRE(history.size() == 3);
  for (std::size_t i = 0; i < history.size(); ++i) {
    CHECK(history[i].version == static_cast<int>(i) + 1);
    CHECK_FALSE(history[i].source.empty());
  }
  CHECK(campaign.session().kb().replay() == campaign.session().spec());

  const auto restored = app::Campaign::restore(dir);
  CHECK(restored.rounds().size() == 3);
  CHECK(restored.session().spec() == campaign.session().spec());
  CHECK(restored.state().digest() == campaign.state().digest());
  fs::remove_all(dir);
}

TEST_CASE("campaign: human-agent rounds stay open until feedback") {
  auto c = small_config(tuning::Mode::HumanAgent);
  c.tuning.reasoner.kind = "none";
  app::Campaign campaign(c);
  campaign.train(1);
  const auto& r = campaign.open_round();
  CHECK(r.status == app::RoundStatus::Open);
  CHECK_THROWS_AS(campaign.open_round(), app::RoundAlreadyOpen);
  CHECK_THROWS_AS(campaign.submit_feedback(2, {}), app::UnknownRound);

  tuning::FeedbackRecord free{"f1", 1, tuning::Author::Human, {tuning::FreeText{"lighter please"}}};
  const auto unresolved = campaign.submit_feedback(1, free);
  CHECK_FALSE(unresolved.resolved);
  CHECK(campaign.round(1).status == app::RoundStatus::Open);

  tuning::FeedbackRecord adjust{"f2", 1, tuning::Author::Human, {tuning::AdjustWeight{"mw_penalty", 0.25}}};
  const auto done = campaign.submit_feedback(1, adjust);
  CHECK(done.resolved);
  CHECK(campaign.round(1).status == app::RoundStatus::Closed);
  CHECK(campaign.session().spec().lambda_of("mw_penalty") == doctest::Approx(0.75));
  CHECK_THROWS_AS(campaign.submit_feedback(1, adjust), app::RoundClosed);

  campaign.open_round();
  campaign.skip_round(2);
  CHECK(campaign.round(2).status == app::RoundStatus::Skipped);
  CHECK_THROWS_AS(campaign.skip_round(2), app::RoundClosed);
}

TEST_CASE("campaign: human-human operator edit replaces the objective verbatim") {
  app::Campaign campaign(small_config(tuning::Mode::HumanHuman));
  campaign.train(1);
  campaign.open_round();
  auto edited = obj::internal_objective();
  edited.terms[0].threshold = 420;
  const auto& spec = campaign.operator_edit(1, edited);
  CHECK(spec.find("mw_penalty")->threshold == 420);
  CHECK(spec.version == 1);
  CHECK(campaign.round(1).status == app::RoundStatus::Closed);
  CHECK(campaign.session().kb().history().back().replacement.has_value());

  app::Campaign agent(small_config());
  agent.train(1);
  CHECK_THROWS_AS(agent.operator_edit(1, edited), std::logic_error);
}

TEST_CASE("wire API: session, molecules, feedback, objective, metrics") {
  auto c = small_config(tuning::Mode::HumanAgent);
  c.tuning.reasoner.kind = "none";
  app::Campaign campaign(c);
  campaign.train(2);
  app::SessionService api(campaign);

  auto session = api.handle("GET", "/session", "");
  CHECK(session.status == 200);
  CHECK(session.body["mode"] == "human-agent");
  CHECK(session.body["status"] == "idle");
  CHECK(api.handle("GET", "/rounds/1/molecules", "").status == 404);
  CHECK(api.handle("GET", "/nowhere", "").status == 404);

  const auto opened = api.handle("POST", "/rounds", R"({"request_id": "open-1"})");
  CHECK(opened.status == 201);
  CHECK(opened.body["status"] == "open");
  // Same request id: answered from cache, no second round.
  CHECK(api.handle("POST", "/rounds", R"({"request_id": "open-1"})").body == opened.body);
  CHECK(campaign.rounds().size() == 1);
  CHECK(api.handle("POST", "/rounds", R"({"request_id": "open-2"})").status == 409);
  CHECK(api.handle("GET", "/session", "").body["status"] == "awaiting_feedback");

  const auto mols = api.handle("GET", "/rounds/1/molecules", "");
  REQUIRE(mols.status == 200);
  REQUIRE(mols.body["molecules"].size() == 20);
  const auto& first = mols.body["molecules"][0];
  CHECK(first["rank"] == 1);
  CHECK(first.contains("smiles"));
  CHECK(first.contains("score"));
  CHECK(first["properties"].contains("mol_weight"));
  CHECK(first["smiles"] == campaign.round(1).top[0].smiles);

  // FreeText without a reasoner: insufficient, with questions.
  const auto free = api.handle("POST", "/rounds/1/feedback", feedback("f1", json::array({{{"kind", "free_text"}, {"text", "nicer"}}})));
  CHECK(free.status == 200);
  CHECK(free.body["sufficient"] == false);
  CHECK_FALSE(free.body["questions"].empty());
  CHECK(free.body["clarification"]["feedback_id"] == "f1");

  // Schema violations.
  CHECK(api.handle("POST", "/rounds/1/feedback", feedback("f9", json::array({{{"kind", "bogus"}}}))).status == 422);
  CHECK(api.handle("POST", "/rounds/1/feedback", "not json").status == 422);
  CHECK(api.handle("POST", "/rounds/7/feedback", feedback("f9", json::array())).status == 404);

  // AdjustWeight: sufficient, and the objective version moves.
  const std::string body = feedback("f2", json::array({{{"kind", "adjust_weight"}, {"term", "diversity"}, {"delta", 0.2}}}));
  const auto ok = api.handle("POST", "/rounds/1/feedback", body, "fb-2");
  CHECK(ok.status == 200);
  CHECK(ok.body["sufficient"] == true);
  const auto objective = api.handle("GET", "/objective", "");
  CHECK(objective.body["objective"]["version"] == 1);
  CHECK(objective.body["history"].size() == 1);
  // Replay of the same request id is harmless; a different body under it is not.
  CHECK(api.handle("POST", "/rounds/1/feedback", body, "fb-2").body == ok.body);
  CHECK(api.handle("POST", "/rounds/1/feedback", feedback("f3", json::array()), "fb-2").status == 422);
  CHECK(campaign.session().spec().version == 1);

  // The round is closed now.
  CHECK(api.handle("POST", "/rounds/1/feedback", feedback("f4", json::array({{{"kind", "no_op"}}}))).status == 409);

  const auto metrics = api.handle("GET", "/metrics", "");
  CHECK(metrics.body["epochs"].size() == static_cast<std::size_t>(campaign.state().epoch));

  const auto bad = api.handle("POST", "/patterns/validate", R"({"pattern": "C(=O"})");
  CHECK(bad.body["valid"] == false);
  CHECK(bad.body.contains("position"));
  CHECK(api.handle("POST", "/patterns/validate", R"({"pattern": "C=CC(=O)O"})").body["valid"] == true);
}

TEST_CASE("wire API: pending keyword rules wait for approval") {
  auto c = small_config(tuning::Mode::HumanAgent);
  c.tuning.reasoner.kind = "keyword";
  app::Campaign campaign(c);
  campaign.train(1);
  app::SessionService api(campaign);
  api.handle("POST", "/rounds", "");
  const auto r = api.handle("POST", "/rounds/1/feedback",
                            feedback("f1", json::array({{{"kind", "free_text"}, {"text", "these are too heavy"}}})));
  CHECK(r.status == 200);
  CHECK(r.body["sufficient"] == true);
  CHECK(r.body["pending"].size() == 1);
  CHECK(api.handle("GET", "/session", "").body["pending"].size() == 1);
  CHECK(campaign.session().spec().version == 0);
  CHECK(api.handle("POST", "/approvals", R"({"approve": "yes"})").status == 422);
  const auto approved = api.handle("POST", "/approvals", R"({"approve": true})");
  CHECK(approved.status == 200);
  CHECK(campaign.session().spec().version == 1);
  CHECK(campaign.session().spec().find("mw_penalty")->threshold == doctest::Approx(450));
}
