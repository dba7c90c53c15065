#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::chem {

inline constexpr std::size_t kMaxPatternAtoms = 32;

/// Atom compatibility used by the matcher. Elements and aromatic flags must
/// agree; a wildcard pattern atom matches any target atom; a bracket pattern
/// atom additionally fixes hydrogen count and charge.
bool atoms_compatible(const Atom& pattern, const Atom& target);
/// A pattern single bond also matches an aromatic target bond.
bool bonds_compatible(BondOrder pattern, BondOrder target);

/// First monomorphism found, as pattern atom -> target atom.
/// Throws std::invalid_argument when the pattern exceeds kMaxPatternAtoms.
std::optional<std::vector<int>> find_substructure(const Molecule& pattern, const Molecule& target);
bool match_substructure(const Molecule& pattern, const Molecule& target);

/// Number of distinct target atom sets covered by a match.
std::size_t count_matches(const Molecule& pattern, const Molecule& target);

}  // namespace fragmenta::chem
