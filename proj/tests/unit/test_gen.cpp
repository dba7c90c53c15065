#include <algorithm>
#include <set>

#include "doctest.h"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/frag/decompose.hpp"
#include "fragmenta/gen/generator.hpp"
#include "fragmenta/gen/rank.hpp"
#include "fragmenta/qlearn/rewards.hpp"
#include "support/oracles.hpp"

using namespace fragmenta;

namespace {

struct Model {
  qlearn::QTable q;
  frag::Vocabulary vocab;
  std::set<qlearn::ConnectionKey> training_keys;
};

// Reconstruction-only warm start, the same loop as the orchestrator's first steps.
Model warm_start(const std::vector<std::string>& smiles, int epochs) {
  Model m;
  std::vector<chem::Molecule> mols;
  for (const auto& s : smiles) mols.push_back(chem::parse_smiles(s));
  for (int e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < mols.size(); ++i) {
      frag::DecompositionConfig cfg;
      cfg.rng_seed = derive_seed(99, static_cast<std::uint64_t>(e), i);
      const auto d = frag::decompose(mols[i], m.q, cfg);
      m.vocab.add(d);
      qlearn::insert_fragments(m.q, m.vocab);
      qlearn::reward_reconstruction(m.q, d);
      for (const auto& k : qlearn::connection_keys(d)) m.training_keys.insert(k);
    }
  }
  return m;
}

const std::vector<std::string> kSmall{"C=CC(=O)OC", "C=C(C)C(=O)OCCO", "C=CC(=O)OCCCC", "OCCO", "NCCN",
                                      "C=CC(=O)Oc1ccccc1", "CC(C)(C)OC(=O)C=C"};

}  // namespace

TEST_CASE("single closed fragment vocabulary yields that fragment") {
  qlearn::QTable q;
  frag::Vocabulary vocab;
  vocab.add(frag::Fragment::from_key("CCO"));
  qlearn::insert_fragments(q, vocab);
  gen::GenerationIndex index(q, vocab);
  gen::GenerationConfig cfg;
  Rng rng(1);
  const auto g = gen::generate_one(index, cfg, rng);
  CHECK(g.smiles.str() == "CCO");
  CHECK(g.connections_used.empty());
  CHECK(g.fragment_count == 1);
}

TEST_CASE("empty vocabulary is rejected") {
  qlearn::QTable q;
  frag::Vocabulary vocab;
  CHECK_THROWS_AS(gen::GenerationIndex(q, vocab), std::invalid_argument);
}

TEST_CASE("config validation") {
  gen::GenerationConfig cfg;
  cfg.top_r = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.temperature = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_fragments = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(gen::strategy_from_string("bal") == gen::Strategy::Bal);
  CHECK_THROWS_AS(gen::strategy_from_string("greedy"), std::invalid_argument);
}

TEST_CASE("fragment cap hydrogen-caps surplus sites") {
  qlearn::QTable q;
  frag::Vocabulary vocab;
  vocab.add(frag::Fragment::from_key("[*:1]CC[*:2]"));
  vocab.add(frag::Fragment::from_key("[*:1]OCO[*:2]"));
  qlearn::insert_fragments(q, vocab);
  gen::GenerationIndex index(q, vocab);
  gen::GenerationConfig cfg;
  cfg.max_fragments = 2;
  cfg.batch_size = 200;
  for (const auto& g : gen::generate_batch(index, cfg)) {
    CHECK(g.fragment_count == 2);
    CHECK(g.connections_used.size() == 1);
    CHECK(g.capped_sites == 2);
    CHECK(chem::is_valence_valid(g.molecule));
  }
}

TEST_CASE("determinism and batch seeding") {
  const auto model = warm_start(kSmall, 5);
  gen::GenerationIndex index(model.q, model.vocab);
  gen::GenerationConfig cfg;
  cfg.rng_seed = 42;
  cfg.batch_size = 64;
  Rng a(7), b(7);
  CHECK(gen::generate_one(index, cfg, a).smiles == gen::generate_one(index, cfg, b).smiles);

  const auto par = gen::generate_batch(index, cfg);
  const auto ser = gen::generate_batch_serial(index, cfg);
  REQUIRE(par.size() == ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    CHECK(par[i].smiles == ser[i].smiles);
    CHECK(par[i].connections_used == ser[i].connections_used);
  }
  // Items generated in reverse order match the batch item for item.
  for (std::size_t i = par.size(); i-- > 0;) CHECK(gen::generate_item(index, cfg, i).smiles == par[i].smiles);

  cfg.batch_size = 0;
  CHECK(gen::generate_batch(index, cfg).empty());
}

TEST_CASE("outputs are valid and reassemble from their links") {
  const auto model = warm_start(kSmall, 5);
  gen::GenerationIndex index(model.q, model.vocab);
  for (auto strategy : {gen::Strategy::Ran, gen::Strategy::Bal}) {
    gen::GenerationConfig cfg;
    cfg.strategy = strategy;
    cfg.batch_size = 300;
    cfg.rng_seed = 5;
    for (const auto& g : gen::generate_batch(index, cfg)) {
      CHECK(chem::is_valence_valid(g.molecule));
      CHECK(g.fragment_count <= cfg.max_fragments);
      CHECK(g.fragment_count == static_cast<int>(g.fragment_keys.size()));
      CHECK(g.connections_used.size() == g.links.size());
      std::vector<frag::Fragment> frags;
      for (const auto& k : g.fragment_keys) frags.push_back(frag::Fragment::from_key(k));
      const auto rebuilt = frag::reassemble(frags, g.links);
      CHECK(oracle::isomorphic(rebuilt, g.molecule));
      // The written SMILES parses back to the same canonical form.
      CHECK(chem::write_canonical(chem::parse_smiles(g.smiles.str())) == g.smiles);
    }
  }
}

TEST_CASE("support restriction without the epsilon floor") {
  const auto model = warm_start(kSmall, 5);
  gen::GenerationIndex index(model.q, model.vocab, false);
  gen::GenerationConfig cfg;
  cfg.epsilon_floor = false;
  cfg.batch_size = 500;
  for (const auto& g : gen::generate_batch(index, cfg))
    for (const auto& k : g.connections_used) CHECK(model.training_keys.count(k) == 1);
}

TEST_CASE("bal at high temperature explores a superset of ran with top_r 1") {
  const auto model = warm_start(kSmall, 5);
  gen::GenerationIndex index(model.q, model.vocab);
  gen::GenerationConfig ran;
  ran.top_r = 1;
  ran.batch_size = 1000;
  gen::GenerationConfig bal = ran;
  bal.strategy = gen::Strategy::Bal;
  bal.temperature = 50.0;
  std::set<qlearn::ConnectionKey> ran_keys, bal_keys;
  for (const auto& g : gen::generate_batch(index, ran)) ran_keys.insert(g.connections_used.begin(), g.connections_used.end());
  for (const auto& g : gen::generate_batch(index, bal)) bal_keys.insert(g.connections_used.begin(), g.connections_used.end());
  CHECK(std::includes(bal_keys.begin(), bal_keys.end(), ran_keys.begin(), ran_keys.end()));
  CHECK(bal_keys.size() > ran_keys.size());
}

TEST_CASE("rank_outputs ordering") {
  const auto model = warm_start(kSmall, 3);
  gen::GenerationIndex index(model.q, model.vocab);
  gen::GenerationConfig cfg;
  cfg.batch_size = 50;
  const auto batch = gen::generate_batch(index, cfg);

  // No terms: every score is 1 and the order is canonical-string order.
  const auto flat = gen::rank_outputs(batch, obj::ObjectiveSpec{}, batch.size());
  REQUIRE(flat.size() == batch.size());
  for (std::size_t i = 1; i < flat.size(); ++i) CHECK(flat[i - 1].item.smiles <= flat[i].item.smiles);
  std::multiset<std::string> a, b;
  for (const auto& g : batch) a.insert(g.smiles.str());
  for (const auto& r : flat) b.insert(r.item.smiles.str());
  CHECK(a == b);

  const auto top = gen::rank_outputs(batch, obj::internal_objective(), 10);
  CHECK(top.size() == 10);
  for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].score >= top[i].score);
  CHECK(top.front().rank == 1);
  CHECK_THROWS_AS(gen::rank_outputs(batch, obj::ObjectiveSpec{}, batch.size() + 1), std::invalid_argument);
}
