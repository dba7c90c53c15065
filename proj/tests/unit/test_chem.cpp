#include <cmath>
#include <set>

#include "doctest.h"
#include "fragmenta/chem/canonical.hpp"
#include "fragmenta/chem/fingerprint.hpp"
#include "fragmenta/chem/properties.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/chem/substructure.hpp"
#include "support/oracles.hpp"

using namespace fragmenta::chem;

namespace {
std::string canon(std::string_view s) { return write_canonical(parse_smiles(s)).str(); }
}  // namespace

TEST_CASE("methane has four implicit hydrogens") {
  auto m = parse_smiles("C");
  REQUIRE(m.atom_count() == 1);
  CHECK(m.atom(0).implicit_h == 4);
}

TEST_CASE("benzene is perceived aromatic with six ring bonds") {
  auto m = parse_smiles("c1ccccc1");
  int ring_bonds = 0;
  for (std::size_t b = 0; b < m.bond_count(); ++b) ring_bonds += m.is_ring_bond(static_cast<int>(b));
  CHECK(ring_bonds == 6);
  for (const auto& a : m.atoms()) CHECK(a.aromatic);
}

TEST_CASE("Kekule and aromatic benzene share a canonical string") {
  auto k = parse_smiles("C1=CC=CC=C1");
  auto a = parse_smiles("c1ccccc1");
  CHECK(oracle::isomorphic(k, a));
  CHECK(write_canonical(k) == write_canonical(a));
}

TEST_CASE("canonical form ignores input atom order") {
  CHECK(canon("OCC") == canon("CCO"));
  CHECK(canon("OC(=O)C=C") == canon("C=CC(O)=O"));
  CHECK(canon("c1ccncc1") == canon("n1ccccc1"));
}

TEST_CASE("write then parse is a fixed point") {
  for (const char* s : {"CCO", "c1ccccc1O", "C=CC(=O)OCC1CO1", "[NH4+]", "C[N+](C)(C)C", "OC(=O)c1ccc[nH]1",
                        "c1ccc2ccccc2c1", "C1CC2CCC1(C)C2(C)C", "FC(F)(F)C#N", "c1ccsc1", "O=S(=O)(O)O",
                        "[O-]C(=O)C", "Nc1ccc(Cc2ccc(N)cc2)cc1", "B(O)(O)c1ccccc1", "C%12CC%12"}) {
    CAPTURE(s);
    const auto first = canon(s);
    const auto again = parse_smiles(first);
    CHECK(write_canonical(again).str() == first);
    CHECK(oracle::isomorphic(again, parse_smiles(s)));
  }
}

TEST_CASE("100 permutations of a 12-atom molecule give one canonical string") {
  auto m = parse_smiles("C=CC(=O)OCC(C)(C)COC");
  REQUIRE(m.atom_count() == 12);
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) seen.insert(write_canonical(oracle::shuffled(m, seed)).str());
  CHECK(seen.size() == 1);
}

TEST_CASE("parser rejects unsupported and malformed input with typed errors") {
  CHECK_THROWS_AS(parse_smiles("C/C=C/C"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("[13CH4]"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("C[C@H](O)N"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles("CC.O"), MultiComponentError);
  CHECK_THROWS_AS(parse_smiles("C1CC"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C(C"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("[CH4"), SyntaxError);
  CHECK_THROWS_AS(parse_smiles("C(=O)(=O)=O"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("c1cccc1"), ValenceError);
  CHECK_THROWS_AS(parse_smiles("*C"), UnsupportedFeature);
  CHECK_THROWS_AS(parse_smiles(""), SyntaxError);
}

TEST_CASE("wildcards are accepted in fragment context and relabelled canonically") {
  ParseOptions opts;
  opts.allow_wildcards = true;
  auto f = parse_smiles("[*:2]CC[*:1]", opts);
  CHECK(write_canonical(f).str() == "[*:1]CC[*:2]");
}

TEST_CASE("tanimoto arithmetic") {
  Fingerprint a(8), b(8);
  a.set(1);
  a.set(2);
  b.set(2);
  b.set(3);
  CHECK(tanimoto(a, b) == doctest::Approx(1.0 / 3.0));
  CHECK(tanimoto(a, a) == 1.0);
  Fingerprint c(8);
  c.set(5);
  CHECK(tanimoto(a, c) == 0.0);
  CHECK(tanimoto(Fingerprint(8), Fingerprint(8)) == 1.0);
  CHECK_THROWS_AS(tanimoto(a, Fingerprint(16)), WidthMismatch);
}

TEST_CASE("ethanol and methanol fingerprints match hand enumeration") {
  // Radius 0: ethanol {CH3, CH2, OH}, methanol {CH3, OH}; CH3 and OH are the
  // same invariants in both. Radius 1 environments are all distinct. Radius 2
  // adds nothing because every radius-2 bond set was already covered.
  const auto eth = morgan_environments(parse_smiles("CCO"), 2);
  const auto met = morgan_environments(parse_smiles("CO"), 2);
  CHECK(eth.size() == 6);
  CHECK(met.size() == 4);
  const double t = tanimoto(morgan_fingerprint(parse_smiles("CCO")), morgan_fingerprint(parse_smiles("CO")));
  CHECK(t == doctest::Approx(2.0 / 8.0));
  CHECK(tanimoto(morgan_fingerprint(parse_smiles("C")), morgan_fingerprint(parse_smiles("O"))) < 1.0);
}

TEST_CASE("fingerprint is invariant under atom permutation") {
  auto m = parse_smiles("C=CC(=O)OCc1ccccc1");
  const auto fp = morgan_fingerprint(m);
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(morgan_fingerprint(oracle::shuffled(m, seed)) == fp);
}

TEST_CASE("substructure matching") {
  CHECK(match_substructure(parse_pattern("C=CC(=O)O"), parse_smiles("C=CC(=O)OC")));
  CHECK_FALSE(match_substructure(parse_pattern("N"), parse_smiles("CCO")));
  auto t = parse_smiles("c1ccccc1CCO");
  CHECK(match_substructure(t, t));
  CHECK(match_substructure(parse_pattern("cC"), t));
  CHECK(count_matches(parse_pattern("[OH]"), parse_smiles("OCCO")) == 2);
  CHECK(count_matches(parse_pattern("[OH]"), parse_smiles("OCCOC")) == 1);
  CHECK_FALSE(match_substructure(parse_pattern("C=C"), parse_smiles("c1ccccc1")));
}

TEST_CASE("substructure agrees with brute force on small pairs") {
  const char* patterns[] = {"CC", "C=O", "CO", "cc", "C(=O)O", "CCC", "c1ccccc1", "CN", "OCCO", "C=CC(=O)O", "[OH]", "CC(C)C"};
  const char* targets[] = {"CCO", "C=CC(=O)OC", "c1ccccc1O", "NCCN", "OCCOCCO", "CC(C)(C)O", "C=C(C)C(=O)OCCO", "Cc1ccncc1"};
  for (auto p : patterns)
    for (auto t : targets) {
      CAPTURE(p);
      CAPTURE(t);
      auto pm = parse_pattern(p);
      auto tm = parse_smiles(t);
      CHECK(match_substructure(pm, tm) == oracle::brute_force_substructure(pm, tm));
    }
}

TEST_CASE("properties of small molecules") {
  CHECK(properties(parse_smiles("O")).mol_weight == doctest::Approx(18.015).epsilon(1e-4));
  auto p = properties(parse_smiles("CCO"));
  CHECK(p.hbd == 1);
  CHECK(p.hba == 1);
  CHECK(properties(parse_smiles("CC")).rotatable_bonds == 0);
  CHECK(properties(parse_smiles("CCCC")).rotatable_bonds == 1);
  CHECK_FALSE(properties(parse_smiles("CCO")).logp_incomplete);
  CHECK(properties(parse_smiles("B(O)O")).logp_incomplete);
  // Longer alkyl chains are more lipophilic.
  CHECK(properties(parse_smiles("CCCCCCO")).logp > properties(parse_smiles("CCO")).logp);
}

TEST_CASE("lipinski boundaries are inclusive") {
  CHECK_FALSE(lipinski_pass({600, 1, 0, 0, 0}));
  CHECK(lipinski_pass({180, 1.3, 1, 4, 0}));
  CHECK(lipinski_pass({500, 5, 5, 10, 0}));
  CHECK_FALSE(lipinski_pass({500, 5.01, 5, 10, 0}));
}

TEST_CASE("murcko scaffolds") {
  CHECK(murcko_scaffold(parse_smiles("Cc1ccccc1"))->str() == canon("c1ccccc1"));
  CHECK_FALSE(murcko_scaffold(parse_smiles("CCO")).has_value());
  CHECK(murcko_scaffold(parse_smiles("c1ccccc1"))->str() == canon("c1ccccc1"));
  CHECK(murcko_scaffold(parse_smiles("c1ccccc1CCC1CC1"))->str() == canon("c1ccccc1CCC1CC1"));
}
