#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::frag {

using chem::BondOrder;
using chem::Molecule;

class InvalidCut : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AttachmentSite {
  int host = -1;      // atom index in Fragment::graph
  int wildcard = -1;  // the "[*:k]" atom standing in for the partner
  BondOrder order = BondOrder::Single;
};

/// Connected subgraph with open attachment sites. The graph is the parse of
/// the key, so two fragments with equal keys have identical graphs and site
/// lists; site k is the wildcard written "[*:k+1]".
class Fragment {
 public:
  Fragment() = default;
  /// Throws chem::SmilesError when the key does not parse.
  static Fragment from_key(const std::string& key);

  const std::string& key() const noexcept { return key_; }
  const Molecule& graph() const noexcept { return graph_; }
  const std::vector<AttachmentSite>& sites() const noexcept { return sites_; }
  int site_count() const noexcept { return static_cast<int>(sites_.size()); }
  /// Heavy atoms, wildcards excluded.
  std::size_t atom_count() const { return graph_.heavy_atom_count(); }

  bool operator==(const Fragment& other) const { return key_ == other.key_; }

 private:
  std::string key_;
  Molecule graph_;
  std::vector<AttachmentSite> sites_;
};

/// Fragment plus where its atoms came from in the source molecule.
struct FragmentInstance {
  Fragment fragment;
  // Source atom index for every graph atom; -1 for wildcards.
  std::vector<int> source_atoms;
};

struct ConnectionRecord {
  int fragment_a = -1;
  int site_a = -1;
  int fragment_b = -1;
  int site_b = -1;
  BondOrder order = BondOrder::Single;
  int source_bond = -1;
};

struct Decomposition {
  Molecule source;
  std::vector<int> cut_bonds;  // ascending
  std::vector<FragmentInstance> fragments;
  std::vector<ConnectionRecord> connections;

  std::vector<std::string> sorted_keys() const;
};

/// Single, non-ring bonds whose removal does not strand a hydrogenless single
/// atom (a terminal halogen, for instance). Ascending bond indices.
std::vector<int> cuttable_bonds(const Molecule& m);

/// Throws InvalidCut for bonds outside cuttable_bonds(m).
Decomposition apply_cuts(const Molecule& m, std::span<const int> cuts);

struct Link {
  int fragment_a = -1;
  int site_a = -1;
  int fragment_b = -1;
  int site_b = -1;
};

/// Glues fragments along the links. Sites left unlinked are capped with
/// hydrogens. Throws std::invalid_argument for inconsistent links.
Molecule reassemble(std::span<const Fragment> fragments, std::span<const Link> links);
Molecule reassemble(const Decomposition& d);

}  // namespace fragmenta::frag
