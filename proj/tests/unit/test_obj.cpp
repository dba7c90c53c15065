#include <cmath>

#include "doctest.h"
#include "fragmenta/chem/properties.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/obj/metrics.hpp"
#include "fragmenta/obj/objective.hpp"
#include "fragmenta/parallel/kernels.hpp"
#include "fragmenta/util/rng.hpp"
#include "support/oracles.hpp"

using namespace fragmenta;
using chem::parse_smiles;

namespace {

std::vector<chem::Molecule> mols(const std::vector<std::string>& smiles) {
  std::vector<chem::Molecule> out;
  for (const auto& s : smiles) out.push_back(parse_smiles(s));
  return out;
}

std::vector<std::vector<int>> bits(const std::vector<chem::Molecule>& ms) {
  std::vector<std::vector<int>> out;
  for (const auto& m : ms) out.push_back(chem::morgan_fingerprint(m).on_bits());
  return out;
}

// Desirability ramps written out independently of the provider.
double ramp(double x, double a, double b, double c, double d) {
  if (x <= a || x >= d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  if (x <= c) return 1.0;
  return (d - x) / (d - c);
}
double falling(double x, double flat_to, double zero_at) {
  if (x <= flat_to) return 1.0;
  if (x >= zero_at) return 0.0;
  return (zero_at - x) / (zero_at - flat_to);
}

const std::vector<std::string> kMixed{"CCO", "c1ccccc1O", "CC(=O)Nc1ccc(O)cc1", "C=CC(=O)OC", "OCCO", "NCCN",
                                      "CCCCCCCCCCCCCCCCCC(=O)O", "O=C(O)c1ccccc1OC(C)=O", "CN1CCCC1c1cccnc1",
                                      "C1CCC2CCCCC2C1", "[O-][N+](=O)c1ccccc1", "CC(C)Cc1ccc(cc1)C(C)C(=O)O"};

}  // namespace

TEST_CASE("internal objective penalizes heavy and lipophilic molecules") {
  const auto spec = obj::internal_objective();
  CHECK(spec.version == 0);
  CHECK(spec.lambda_of("mw_penalty") == 0.5);
  // C36 alkane: MW ~506, logP well above 5.
  const auto heavy = parse_smiles(std::string(36, 'C'));
  const auto light = parse_smiles("CCO");
  REQUIRE(chem::properties(heavy).mol_weight > 500);
  CHECK(obj::score_individual(heavy, spec) < obj::score_individual(light, spec));
  CHECK(obj::score_individual(light, spec) == 1.0);
  CHECK(obj::score_individual(heavy, spec) == doctest::Approx(0.0));
}

TEST_CASE("empty spec scores 1 and unmatched substructure leaves the score") {
  for (const auto& m : mols(kMixed)) CHECK(obj::score_individual(m, obj::ObjectiveSpec{}) == 1.0);
  obj::ObjectiveSpec spec;
  obj::ObjectiveTerm t;
  t.name = "penalize:N(=O)=O";
  t.kind = obj::TermKind::SubstructurePenalty;
  t.pattern = "N(=O)=O";
  t.lambda = 0.4;
  spec.terms.push_back(t);
  CHECK(obj::score_individual(parse_smiles("CCO"), spec) == 1.0);
  // Pentavalent N is outside the valence table, so nitro is written charge-separated.
  CHECK(obj::score_individual(parse_smiles("C[N+](=O)[O-]"), spec) == 1.0);
  spec.terms[0].pattern = "[N+](=O)[O-]";
  CHECK(obj::score_individual(parse_smiles("C[N+](=O)[O-]"), spec) == doctest::Approx(0.6));
}

TEST_CASE("score is monotone non-increasing in a violated penalty's lambda") {
  const auto m = parse_smiles(std::string(40, 'C'));
  double prev = 2.0;
  for (double lambda = 0.0; lambda <= 1.5; lambda += 0.05) {
    auto spec = obj::internal_objective();
    spec.find("mw_penalty")->lambda = lambda;
    const double s = obj::score_individual(m, spec);
    CHECK(s <= prev);
    CHECK(s >= 0.0);
    prev = s;
  }
}

TEST_CASE("hinge mode grows with the excess") {
  auto spec = obj::internal_objective();
  for (auto& t : spec.terms) t.mode = obj::PenaltyMode::Hinge;
  spec.find("logp_penalty")->lambda = 0.0;
  const double s36 = obj::score_individual(parse_smiles(std::string(36, 'C')), spec);
  const double s40 = obj::score_individual(parse_smiles(std::string(40, 'C')), spec);
  CHECK(s36 > s40);
  CHECK(s36 < 1.0);
}

TEST_CASE("objective JSON round trip and aliases") {
  auto spec = obj::internal_objective();
  obj::ObjectiveTerm bonus;
  bonus.name = "reward:C=CC(=O)O";
  bonus.kind = obj::TermKind::SubstructureBonus;
  bonus.pattern = "C=CC(=O)O";
  bonus.lambda = 0.1;
  bonus.provenance = {"fb-1"};
  spec.terms.push_back(bonus);
  spec.version = 4;
  CHECK(obj::spec_from_json(obj::to_json(spec)) == spec);
  CHECK(obj::property_from_string("MW") == obj::Property::MolWeight);
  CHECK(obj::property_from_string("logP") == obj::Property::LogP);
  CHECK_FALSE(obj::property_from_string("color").has_value());
  auto j = obj::to_json(spec);
  j["terms"][0]["lambda"] = -1.0;
  CHECK_THROWS_AS(obj::spec_from_json(j), std::invalid_argument);
}

TEST_CASE("score_group contributions") {
  obj::ObjectiveSpec spec;
  obj::ObjectiveTerm div;
  div.name = obj::kDiversityTerm;
  div.kind = obj::TermKind::DiversityGroup;
  div.lambda = 1.0;
  spec.terms.push_back(div);
  for (double v : obj::score_group(mols({"CCO", "CCO", "OCC"}), spec)) CHECK(v == 0.0);
  CHECK(obj::score_group(mols({"CCO"}), spec) == std::vector<double>{0.0});
  // No shared environments between these two.
  const auto disjoint = obj::score_group(mols({"CCO", "c1ccccc1"}), spec);
  CHECK(disjoint[0] == 1.0);
  CHECK(disjoint[1] == 1.0);
  // Permutation equivariance.
  const auto batch = mols(kMixed);
  auto rev = batch;
  std::reverse(rev.begin(), rev.end());
  const auto fwd = obj::score_group(batch, spec);
  const auto bwd = obj::score_group(rev, spec);
  for (std::size_t i = 0; i < fwd.size(); ++i) CHECK(fwd[i] == doctest::Approx(bwd[fwd.size() - 1 - i]).epsilon(1e-12));
}

TEST_CASE("proxy QED follows the documented ramps") {
  for (const auto& m : mols(kMixed)) {
    const auto p = chem::properties(m);
    const double expected = ramp(p.mol_weight, 0, 200, 400, 700) * ramp(p.logp, -4, -1, 3, 6) * falling(p.hbd, 2, 7) *
                            falling(p.hba, 5, 12);
    CHECK(obj::proxy_qed(m) == doctest::Approx(expected).epsilon(1e-12));
  }
  // A mid-sized drug-like molecule beats its heavy analogue.
  const auto small = parse_smiles("CC(=O)Nc1ccc(O)cc1CCCCCC");
  const auto large = parse_smiles("CC(=O)Nc1ccc(O)cc1CCCCCCCCCCCCCCCCCCCCCCCCCCCC");
  CHECK(obj::proxy_qed(small) > obj::proxy_qed(large));
}

TEST_CASE("proxy bounds on random molecules and ring monotonicity") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    std::string s = "C";
    const auto len = uniform_index(rng, 30);
    for (std::uint64_t k = 0; k < len; ++k) {
      const auto pick = uniform_index(rng, 6);
      s += pick == 0 ? "O" : pick == 1 ? "N" : pick == 2 ? "C(=O)" : pick == 3 ? "c1ccccc1" : "C";
    }
    const auto m = parse_smiles(s);
    const double q = obj::proxy_qed(m);
    const double sa = obj::proxy_sa(m);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    CHECK(sa >= 1.0);
    CHECK(sa <= 10.0);
  }
  CHECK(obj::proxy_sa(parse_smiles("C1CCCCC1")) >= obj::proxy_sa(parse_smiles("CCCCCC")));
  CHECK(obj::proxy_sa(parse_smiles("C1CCC2CCCCC2C1")) >= obj::proxy_sa(parse_smiles("C1CCCCC1CCCC")));
}

TEST_CASE("membership patterns") {
  const auto acr = obj::MembershipPattern::parse("# acrylate\nC=CC(=O)O 1\n");
  CHECK(acr.matches(parse_smiles("C=CC(=O)OC")));
  CHECK(acr.matches(parse_smiles("C=C(C)C(=O)OC")));
  CHECK_FALSE(acr.matches(parse_smiles("CCC(=O)OC")));
  const auto ce = obj::MembershipPattern::load(FRAGMENTA_SOURCE_DIR "/data/membership/chain_extenders.txt");
  CHECK(ce.matches(parse_smiles("OCCCCO")));
  CHECK(ce.matches(parse_smiles("NCCN")));
  CHECK_FALSE(ce.matches(parse_smiles("CCCCO")));
  CHECK_THROWS(obj::MembershipPattern::parse("C(( 1"));
}

TEST_CASE("evaluate definitional cases") {
  const auto train = mols(kMixed);
  std::vector<std::string> same;
  for (const auto& s : kMixed) same.push_back(s);
  const auto r = obj::evaluate(std::span<const std::string>(same), train);
  CHECK(r.validity == 100.0);
  CHECK(r.novelty == 0.0);
  CHECK(r.chamfer == 0.0);
  CHECK(r.uniqueness == 100.0);
  CHECK(r.discovery_rate == 0.0);

  const std::vector<std::string> dup{"CCO", "OCC"};
  CHECK(obj::evaluate(std::span<const std::string>(dup), train).uniqueness == 50.0);

  const std::vector<std::string> bad{"CCO", "C(", "c1cccc1", "CCN"};
  const auto rb = obj::evaluate(std::span<const std::string>(bad), train);
  CHECK(rb.validity == 50.0);
  CHECK(rb.valid == 2);
  CHECK(rb.novelty == 50.0);

  const std::vector<std::string> none;
  CHECK_THROWS_AS(obj::evaluate(std::span<const std::string>(none), train), obj::EmptyBatch);
  CHECK_THROWS_AS(obj::evaluate(std::span<const std::string>(dup), std::span<const chem::Molecule>()), obj::EmptyBatch);
}

TEST_CASE("evaluate invariants on a mixed batch") {
  const auto train = mols({"CCO", "C=CC(=O)OC", "OCCO"});
  std::vector<std::string> gen{"C=CC(=O)OCC", "C=CC(=O)OCC", "C=CC(=O)OCCO", "CCCC", "c1ccccc1CC", "C=CC(=O)OC"};
  const auto pattern = obj::MembershipPattern::parse("C=CC(=O)O 1");
  const auto r = obj::evaluate(std::span<const std::string>(gen), train, &pattern);
  CHECK(r.uniqueness == doctest::Approx(500.0 / 6));
  CHECK(r.novelty == doctest::Approx(80.0));
  REQUIRE(r.membership.has_value());
  CHECK(*r.membership == doctest::Approx(400.0 / 6));
  CHECK(r.discovery_rate >= *r.discovery_rate_membership);
  CHECK(r.diversity >= 0.0);
  CHECK(r.diversity <= 1.0);
  CHECK(r.scaffold_count == 1);
  for (double pctv : {r.validity, r.uniqueness, r.novelty, r.lipinski, r.discovery_rate}) {
    CHECK(pctv >= 0.0);
    CHECK(pctv <= 100.0);
  }
  const auto back = obj::report_from_json(obj::to_json(r));
  CHECK(back.uniqueness == r.uniqueness);
  CHECK(back.membership == r.membership);
  const auto table = obj::render_table("LVSEF(ran)", r);
  CHECK(table.find("Valid") < table.find("Unique"));
  CHECK(table.find("DR(mem)") < table.find("logP"));
}

TEST_CASE("diversity and chamfer match naive double loops") {
  Rng rng(11);
  const auto pool = mols(kMixed);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = 1 + uniform_index(rng, 20);
    std::vector<chem::Molecule> gen, ref;
    for (std::uint64_t i = 0; i < n; ++i) gen.push_back(pool[uniform_index(rng, pool.size())]);
    for (std::uint64_t i = 0; i < 1 + uniform_index(rng, 20); ++i) ref.push_back(pool[uniform_index(rng, pool.size())]);
    const auto gf = parallel::fingerprints(gen, 2, 2048);
    const auto rf = parallel::fingerprints(ref, 2, 2048);
    const double d_oracle = oracle::mean_pairwise_distance(bits(gen));
    const double c_oracle = oracle::chamfer(bits(gen), bits(ref));
    for (auto exec : {parallel::Exec::Serial, parallel::Exec::Parallel}) {
      CHECK(std::abs(parallel::mean_pairwise_distance(gf, exec) - d_oracle) <= 1e-12);
      CHECK(std::abs(parallel::chamfer_distance(gf, rf, exec) - c_oracle) <= 1e-12);
    }
    CHECK(parallel::mean_pairwise_distance(gf, parallel::Exec::Serial) ==
          parallel::mean_pairwise_distance(gf, parallel::Exec::Parallel));
    CHECK(parallel::mean_distance_to_rest(gf, parallel::Exec::Serial) ==
          parallel::mean_distance_to_rest(gf, parallel::Exec::Parallel));
  }
  // Zero iff identical.
  const auto same = parallel::fingerprints(mols({"CCO", "OCC", "C(O)C"}), 2, 2048);
  CHECK(parallel::mean_pairwise_distance(same) == 0.0);
}
