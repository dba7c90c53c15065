#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace fragmenta::chem {

/// Elements accepted by the SMILES subset, keyed by atomic number.
/// Wildcard marks an attachment site on a fragment.
enum class Element : std::uint8_t {
  Wildcard = 0,
  H = 1,
  B = 5,
  C = 6,
  N = 7,
  O = 8,
  F = 9,
  P = 15,
  S = 16,
  Cl = 17,
  Br = 35,
  I = 53,
};

std::string_view element_symbol(Element e);
std::optional<Element> element_from_symbol(std::string_view symbol);

/// Standard atomic weight in g/mol (IUPAC conventional values).
double atomic_weight(Element e);

bool is_organic_subset(Element e);
bool is_halogen(Element e);
bool is_heteroatom(Element e);  // anything heavy that is not carbon

/// Allowed total valences (bond orders + hydrogens) for an element at a given
/// formal charge, ascending. Empty when the charge state is unsupported.
std::span<const int> allowed_valences(Element e, int charge);

/// Smallest allowed valence >= used, or nullopt when used exceeds all of them.
std::optional<int> fill_valence(Element e, int charge, int used);

}  // namespace fragmenta::chem
