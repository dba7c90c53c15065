#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. They favour obviousness over speed and share no code with the
// library beyond the Molecule container.

#include <cstdint>
#include <vector>

#include "fragmenta/chem/molecule.hpp"

namespace oracle {

using fragmenta::chem::Molecule;

/// Exact graph isomorphism on element, charge, aromatic flag, hydrogen count
/// and bond order. Wildcard site labels are ignored.
bool isomorphic(const Molecule& a, const Molecule& b);

/// Every injective atom map checked pattern bond by pattern bond.
bool brute_force_substructure(const Molecule& pattern, const Molecule& target);

/// Copy of m with atoms renumbered (new index perm[i] for old atom i) and the
/// bond list shuffled by bond_perm.
Molecule permute(const Molecule& m, const std::vector<int>& perm, const std::vector<int>& bond_perm);

/// Random permutation of m driven by seed.
Molecule shuffled(const Molecule& m, std::uint64_t seed);

}  // namespace oracle

#include <string>

#include "fragmenta/qlearn/qtable.hpp"

namespace oracle {

/// Per-site floored MFR sum computed by scanning every table entry.
double naive_mfr(const std::string& key, int site_count, const fragmenta::qlearn::QTable& q);

/// Exhaustive MFR argmax over all cut subsets of size <= max_cuts, with the
/// tie rule (fewer cuts, then sorted fragment keys). Returns the cut set.
std::vector<int> brute_force_best_cuts(const Molecule& m, const fragmenta::qlearn::QTable& q, int max_cuts);

/// Every subset of `items` with at most max_size elements.
std::vector<std::vector<int>> all_subsets(const std::vector<int>& items, int max_size);

}  // namespace oracle

namespace oracle {

/// |A n B| / |A u B| over explicit on-bit lists; 1 when both are empty.
double tanimoto(const std::vector<int>& a, const std::vector<int>& b);

/// Plain double loops over every pair, summed in loop order.
double mean_pairwise_distance(const std::vector<std::vector<int>>& bits);
double chamfer(const std::vector<std::vector<int>>& generated,
               const std::vector<std::vector<int>>& reference);

}  // namespace oracle
