#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fragmenta/chem/element.hpp"

namespace fragmenta::chem {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

/// Bond contribution to an atom's explicit valence. Aromatic bonds count 1; the
/// extra pi bond is accounted for by kekulization.
constexpr int bond_valence(BondOrder order) {
  return order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
}

struct Atom {
  Element element = Element::C;
  int charge = 0;
  bool aromatic = false;
  int implicit_h = 0;
  // Written in brackets at parse time. For query molecules a bracket atom
  // constrains hydrogen count and charge of its match.
  bool bracket = false;
  // Attachment-site label for wildcard atoms (0 when unlabelled).
  int site = 0;

  bool is_wildcard() const { return element == Element::Wildcard; }
  bool operator==(const Atom&) const = default;
};

struct Bond {
  int begin = -1;
  int end = -1;
  BondOrder order = BondOrder::Single;

  int other(int atom) const { return atom == begin ? end : begin; }
};

struct Neighbor {
  int atom;
  int bond;
};

/// Attributed molecular graph with implicit hydrogens. Ring membership is
/// recomputed by refresh_rings(); producers call it once the graph is final.
class Molecule {
 public:
  int add_atom(const Atom& atom);
  /// Throws std::invalid_argument for self-loops or duplicate bonds.
  int add_bond(int a, int b, BondOrder order);

  std::size_t atom_count() const { return atoms_.size(); }
  std::size_t bond_count() const { return bonds_.size(); }
  bool empty() const { return atoms_.empty(); }

  const Atom& atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  Atom& atom(int i) { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond& bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  Bond& bond(int i) { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }
  std::span<const Neighbor> neighbors(int atom) const {
    return adjacency_[static_cast<std::size_t>(atom)];
  }

  int degree(int atom) const { return static_cast<int>(neighbors(atom).size()); }
  /// Index of the bond joining a and b, or -1.
  int bond_between(int a, int b) const;
  /// Sum of bond valences, aromatic counted as 1, hydrogens excluded.
  int bond_valence_sum(int atom) const;

  void refresh_rings();
  bool rings_current() const { return rings_current_; }
  bool is_ring_bond(int bond) const;
  bool in_ring(int atom) const;
  /// Cyclomatic number (independent cycle count) of the connected graph.
  int ring_count() const;

  bool is_connected() const;
  /// Component id per atom, numbered in order of first atom.
  std::vector<int> components(std::span<const char> removed_bonds = {}) const;

  /// Copy without the flagged atoms; bonds to them disappear. `index_map`
  /// receives old→new indices (-1 for dropped atoms) when non-null.
  Molecule without_atoms(std::span<const char> drop, std::vector<int>* index_map = nullptr) const;

  std::size_t heavy_atom_count() const;  // excludes wildcards

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<char> ring_bond_;
  std::vector<char> ring_atom_;
  bool rings_current_ = false;
};

/// Assigns single/double orders to every aromatic bond so that each atom with
/// needs_double[i] set gets exactly one double bond. Returns false when no
/// such assignment exists (or the search budget is exhausted).
bool kekulize(Molecule& m, std::span<const char> needs_double);

/// Which aromatic atoms need a pi bond, judged from the atom's known hydrogen
/// count and charge. Empty result entries for non-aromatic atoms.
std::vector<char> aromatic_pi_demand(const Molecule& m);

/// Marks rings of size 5 and 6 with a Hückel pi count as aromatic. Expects a
/// Kekulé molecule (no aromatic bonds) with current ring info.
void perceive_aromaticity(Molecule& m);

/// Throws ValenceError describing the first offending atom.
void validate_valence(const Molecule& m);
bool is_valence_valid(const Molecule& m);

}  // namespace fragmenta::chem
