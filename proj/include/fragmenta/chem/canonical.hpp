#pragma once

#include <compare>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::chem {

struct CanonicalForm;
class CanonicalSmiles;
CanonicalForm canonical_form(const Molecule& m);
CanonicalSmiles write_canonical(const Molecule& m);

/// SMILES text produced by the canonical writer. Equal strings denote
/// isomorphic molecules (for the supported subset).
class CanonicalSmiles {
 public:
  CanonicalSmiles() = default;

  const std::string& str() const noexcept { return text_; }
  bool empty() const noexcept { return text_.empty(); }

  auto operator<=>(const CanonicalSmiles&) const = default;
  bool operator==(const CanonicalSmiles&) const = default;

  /// Rewraps text previously produced by the canonical writer (persisted
  /// keys, reports). The caller vouches for its provenance.
  static CanonicalSmiles trusted(std::string text) { return CanonicalSmiles(std::move(text)); }

 private:
  explicit CanonicalSmiles(std::string text) : text_(std::move(text)) {}
  std::string text_;

  friend struct CanonicalForm;
  friend CanonicalSmiles write_canonical(const Molecule&);
  friend CanonicalForm canonical_form(const Molecule&);
};

struct CanonicalForm {
  CanonicalSmiles smiles;
  // Atom indices in the order they appear in the string.
  std::vector<int> output_order;
  // Wildcard atom indices in order of appearance; label k+1 is written for
  // entry k.
  std::vector<int> site_atoms;
};

/// Canonical SMILES. Wildcards are written "[*:k]" with k numbered by order
/// of appearance, so site ordinals are canonical too.
CanonicalForm canonical_form(const Molecule& m);
CanonicalSmiles write_canonical(const Molecule& m);

/// Total order used by the canonical writer (rank per atom, 0-based).
std::vector<int> canonical_ranks(const Molecule& m);

/// Writes SMILES visiting atoms by the supplied total order (lower rank first).
/// Not canonical unless `ranks` is.
std::string write_smiles(const Molecule& m, std::span<const int> ranks,
                         std::vector<int>* output_order = nullptr);

}  // namespace fragmenta::chem

template <>
struct std::hash<fragmenta::chem::CanonicalSmiles> {
  std::size_t operator()(const fragmenta::chem::CanonicalSmiles& s) const noexcept {
    return std::hash<std::string>{}(s.str());
  }
};
