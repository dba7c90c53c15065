#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/frag/decompose.hpp"
#include "fragmenta/qlearn/rewards.hpp"
#include "fragmenta/util/rng.hpp"

using namespace fragmenta;
using qlearn::ConnectionKey;
using qlearn::QParams;
using qlearn::QTable;

namespace {
std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("fragmenta_test_" + name)).string();
}
}  // namespace

TEST_CASE("update arithmetic") {
  QTable q(QParams{0.1, 0.5, false});
  const auto k = ConnectionKey::make("A", 0, "B", 1);
  CHECK(std::abs(q.update(k, 1.0) - 0.55) < 1e-12);
  CHECK(std::abs(q.update(k, 1.0) - 0.775) < 1e-12);
  QTable d(QParams{0.1, 0.5, false});
  d.update(k, 1.0);
  CHECK(std::abs(d.update(k, 0.0) - 0.275) < 1e-12);
  const double before = d.value(k);
  CHECK(d.update(k, before) == before);
  CHECK(d.find(k)->visits == 3);
}

TEST_CASE("rewards are clamped and non-finite rewards rejected") {
  QTable q(QParams{0.1, 1.0, false});
  const auto k = ConnectionKey::make("A", 0, "B", 0);
  CHECK(q.update(k, 7.0) == 1.0);
  CHECK(q.update(k, -3.0) == 0.0);
  CHECK_THROWS_AS(q.update(k, std::nan("")), std::invalid_argument);
}

TEST_CASE("raw sum mode accumulates") {
  QTable q(QParams{0.1, 0.5, true});
  const auto k = ConnectionKey::make("A", 0, "B", 0);
  q.update(k, 1.0);
  CHECK(q.update(k, 1.0) == doctest::Approx(2.1));
}

TEST_CASE("orientation invariance for random keys") {
  Rng rng(17);
  QTable q;
  for (int i = 0; i < 10000; ++i) {
    const auto a = "f" + std::to_string(uniform_index(rng, 30));
    const auto b = "f" + std::to_string(uniform_index(rng, 30));
    const int sa = static_cast<int>(uniform_index(rng, 3));
    const int sb = static_cast<int>(uniform_index(rng, 3));
    const ConnectionKey k{a, sa, b, sb};
    CHECK(ConnectionKey::make(a, sa, b, sb) == ConnectionKey::make(b, sb, a, sa));
    CHECK(k.normalized().is_normalized());
    const double via_swap = q.update(k.swapped(), uniform01(rng));
    CHECK(q.value(k) == via_swap);
  }
}

TEST_CASE("lazy fragment registration") {
  QTable q;
  frag::Vocabulary v;
  v.add(frag::Fragment::from_key("[*:1]C"));
  v.add(frag::Fragment::from_key("[*:1]CO"));
  CHECK(qlearn::insert_fragments(q, v) == 2);
  CHECK(q.size() == 0);
  CHECK(q.knows_fragment("[*:1]C"));
  CHECK(qlearn::insert_fragments(q, v) == 0);
  q.update(ConnectionKey::make("[*:1]C", 0, "[*:1]CO", 0), 1.0);
  CHECK(q.size() == 1);
}

TEST_CASE("reconstruction rewards") {
  auto m = chem::parse_smiles("CCO");
  auto d = frag::apply_cuts(m, std::vector<int>{0});
  QTable q(QParams{0.1, 0.5, false});
  qlearn::reward_reconstruction(q, d, 1.0);
  const auto key = qlearn::connection_key(d, d.connections[0]);
  CHECK(std::abs(q.value(key) - 0.55) < 1e-12);
  qlearn::reward_reconstruction(q, frag::apply_cuts(chem::parse_smiles("OCC"), std::vector<int>{1}), 1.0);
  CHECK(std::abs(q.value(key) - 0.775) < 1e-12);
  const auto size = q.size();
  qlearn::reward_reconstruction(q, frag::apply_cuts(m, std::vector<int>{}), 1.0);
  CHECK(q.size() == size);
}

TEST_CASE("distribute rewards") {
  QTable q(QParams{0.1, 1.0, false});
  const auto k1 = ConnectionKey::make("A", 0, "B", 0);
  const auto k2 = ConnectionKey::make("A", 1, "C", 0);
  std::vector<std::vector<ConnectionKey>> conns{{k1, k2}};
  std::vector<double> ind{0.6}, grp{0.2};
  qlearn::distribute_rewards(q, conns, ind, grp);
  CHECK(q.value(k1) == doctest::Approx(0.8));
  CHECK(q.value(k2) == doctest::Approx(0.8));

  QTable shared(QParams{0.1, 0.5, false});
  std::vector<std::vector<ConnectionKey>> two{{k1}, {k1}};
  std::vector<double> r{1.0, 0.0}, zero{0.0, 0.0};
  qlearn::distribute_rewards(shared, two, r, zero);
  CHECK(shared.find(k1)->visits == 2);
  CHECK(shared.value(k1) == doctest::Approx(0.275));

  QTable empty;
  qlearn::distribute_rewards(empty, std::span<const std::vector<ConnectionKey>>{}, {}, {});
  CHECK(empty.size() == 0);
  CHECK_THROWS_AS(qlearn::distribute_rewards(empty, two, ind, grp), std::invalid_argument);
}

TEST_CASE("q stays within the exponential-average bound") {
  Rng rng(3);
  QTable q(QParams{0.1, 0.3, false});
  for (int i = 0; i < 5000; ++i) {
    const auto k = ConnectionKey::make("f" + std::to_string(uniform_index(rng, 10)), 0, "g", 0);
    const double v = q.update(k, uniform01(rng));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("larger rewards give larger q after equal visits") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    QTable q(QParams{0.1, 0.2, false});
    const auto hi = ConnectionKey::make("h", 0, "x", 0);
    const auto lo = ConnectionKey::make("l", 0, "x", 0);
    for (int step = 0; step < 10; ++step) {
      const double r = uniform01(rng) * 0.9;
      q.update(lo, r);
      q.update(hi, r + 0.05);
    }
    CHECK(q.value(hi) > q.value(lo));
  }
}

TEST_CASE("warm start lifts every training connection above epsilon") {
  auto mols = chem::load_molecules(FRAGMENTA_SOURCE_DIR "/data/chain_extenders.smi");
  QTable q;
  frag::DecompositionConfig cfg;
  cfg.explore_prob = 0.0;
  std::vector<frag::Decomposition> ds;
  for (const auto& m : mols) ds.push_back(frag::decompose(m, q, cfg));
  for (const auto& d : ds) qlearn::reward_reconstruction(q, d);
  for (const auto& d : ds)
    for (const auto& k : qlearn::connection_keys(d)) CHECK(q.value(k) > q.epsilon());
}

TEST_CASE("persist and restore round trip exactly") {
  Rng rng(21);
  QTable q(QParams{0.137, 0.29, false});
  q.insert_fragment("[*:1]C", 1);
  for (int i = 0; i < 300; ++i)
    q.update(ConnectionKey::make("f" + std::to_string(uniform_index(rng, 20)), static_cast<int>(uniform_index(rng, 2)),
                                 "g" + std::to_string(uniform_index(rng, 20)), 0),
             uniform01(rng));
  const auto path = temp_path("qtable.json");
  q.persist(path);
  const auto back = QTable::restore(path);
  CHECK(back == q);
  for (const auto& [k, e] : q.entries()) CHECK(back.find(k)->q == e.q);
  CHECK(back.entries_at("f3", 0).size() == q.entries_at("f3", 0).size());

  QTable empty(QParams{0.2, 0.4, false});
  empty.persist(path);
  const auto e2 = QTable::restore(path);
  CHECK(e2.size() == 0);
  CHECK(e2.params() == empty.params());

  auto j = q.to_json();
  j["version"] = 99;
  CHECK_THROWS_AS(QTable::from_json(j), qlearn::FormatVersionMismatch);
  CHECK_THROWS_AS(QTable::restore(temp_path("does_not_exist.json")), qlearn::IoError);
  std::remove(path.c_str());
}

TEST_CASE("pruning drops stale weak entries") {
  QTable q(QParams{0.1, 1.0, false});
  q.update(ConnectionKey::make("a", 0, "b", 0), 0.0);
  q.update(ConnectionKey::make("a", 0, "c", 0), 1.0);
  CHECK(q.prune(1, 0.05) == 1);
  CHECK(q.size() == 1);
  CHECK(q.entries_at("a", 0).size() == 1);
}
