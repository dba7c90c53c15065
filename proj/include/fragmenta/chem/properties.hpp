#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "fragmenta/chem/canonical.hpp"
#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::chem {

struct PropertyVector {
  double mol_weight = 0.0;
  double logp = 0.0;
  int hbd = 0;
  int hba = 0;
  int rotatable_bonds = 0;
  // Set when some atom class had no logP contribution and counted as 0.
  bool logp_incomplete = false;
};

/// Atom-class logP contributions loaded from a "class value" text table.
class LogpTable {
 public:
  static LogpTable parse(std::string_view text);
  static LogpTable load(const std::string& path);
  /// The table shipped in data/logp_contributions.txt, compiled in.
  static const LogpTable& builtin();

  /// Looks the class up, dropping ".suffix" parts right to left.
  std::optional<double> lookup(std::string_view atom_class) const;
  int version() const noexcept { return version_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  int version_ = 0;
  std::map<std::string, double, std::less<>> values_;
};

/// Contribution class of a heavy atom ("C.sp2.x", "c", "O.ether", ...).
std::string logp_atom_class(const Molecule& m, int atom);

PropertyVector properties(const Molecule& m, const LogpTable& table = LogpTable::builtin());

/// Rule of five with inclusive thresholds.
bool lipinski_pass(const PropertyVector& p);

/// Bemis-Murcko scaffold: terminal non-ring atoms are pruned until none are
/// left. Empty for acyclic molecules.
std::optional<CanonicalSmiles> murcko_scaffold(const Molecule& m);

}  // namespace fragmenta::chem
