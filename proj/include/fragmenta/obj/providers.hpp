#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>

#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::obj {

/// Stand-ins for QED and SA. Swappable so a published implementation can be
/// dropped in without touching scoring or metrics.
class PropertyProvider {
 public:
  virtual ~PropertyProvider() = default;
  virtual std::string name() const = 0;
  virtual double qed(const chem::Molecule& m) const = 0;  // [0, 1], higher is more drug-like
  virtual double sa(const chem::Molecule& m) const = 0;   // [1, 10], lower is easier
};

/// Product of four desirability ramps:
///   MW     0 at 0, rising to 1 at 200, flat to 400, falling to 0 at 700
///   logP   0 at -4, rising to 1 at -1, flat to 3, falling to 0 at 6
///   HBD    1 up to 2, falling to 0 at 7
///   HBA    1 up to 5, falling to 0 at 12
double proxy_qed(const chem::Molecule& m);

/// 1 + 9 * (0.4 size + 0.3 rings + 0.3 rarity), where
///   size   = min(1, heavy atoms / 50)
///   rings  = min(1, independent rings / 6)
///   rarity = share of radius-0/1 atom environments absent from the reference
///            set (0 without a reference).
double proxy_sa(const chem::Molecule& m, const std::set<std::uint64_t>* reference_environments = nullptr);

class ProxyPropertyProvider final : public PropertyProvider {
 public:
  ProxyPropertyProvider() = default;
  /// Rarity judged against the atom environments of a reference corpus.
  explicit ProxyPropertyProvider(std::span<const chem::Molecule> reference);

  std::string name() const override { return "proxy-v1"; }
  double qed(const chem::Molecule& m) const override { return proxy_qed(m); }
  double sa(const chem::Molecule& m) const override;

 private:
  std::set<std::uint64_t> reference_;
  bool has_reference_ = false;
};

const PropertyProvider& default_provider();

}  // namespace fragmenta::obj
