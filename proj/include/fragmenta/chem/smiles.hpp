#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fragmenta/chem/errors.hpp"
#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::chem {

struct ParseOptions {
  // Accept '*' atoms; "[*:n]" labels attachment site n.
  bool allow_wildcards = false;
  // Substructure-query mode: valence is not enforced and aromatic input that
  // cannot be kekulized is kept as written.
  bool query = false;
};

/// Parses a single-component SMILES string from the supported subset:
/// organic-subset and bracket atoms (charge, hydrogen count), branches, ring
/// closures 0-99 (%nn), bond symbols - = # : and lowercase aromatic atoms.
/// Throws SyntaxError, ValenceError, UnsupportedFeature or MultiComponentError.
Molecule parse_smiles(std::string_view text, const ParseOptions& options = {});

/// Parses a substructure pattern (query mode, wildcards allowed).
Molecule parse_pattern(std::string_view text);

/// One molecule per line; '#' comments and blank lines are skipped and only the
/// first whitespace-separated field of a line is read.
struct SmilesRecord {
  std::size_t line = 0;
  std::string text;
};
std::vector<SmilesRecord> read_smiles_lines(std::istream& in);
std::vector<SmilesRecord> read_smiles_file(const std::string& path);

/// Parses every record of a SMILES file; the first failure is rethrown with the
/// line number prefixed.
std::vector<Molecule> load_molecules(const std::string& path);

}  // namespace fragmenta::chem
