#include "fragmenta/obj/providers.hpp"

#include <algorithm>

#include "fragmenta/chem/fingerprint.hpp"
#include "fragmenta/chem/properties.hpp"

namespace fragmenta::obj {

namespace {

// 0 at lo0, linear up to 1 at lo1, flat to hi1, linear down to 0 at hi0.
double trapezoid(double x, double lo0, double lo1, double hi1, double hi0) {
  if (x <= lo0 || x >= hi0) return 0.0;
  if (x < lo1) return (x - lo0) / (lo1 - lo0);
  if (x <= hi1) return 1.0;
  return (hi0 - x) / (hi0 - hi1);
}

double falling(double x, double flat_to, double zero_at) {
  if (x <= flat_to) return 1.0;
  if (x >= zero_at) return 0.0;
  return (zero_at - x) / (zero_at - flat_to);
}

}  // namespace

double proxy_qed(const chem::Molecule& m) {
  const auto p = chem::properties(m);
  const double v = trapezoid(p.mol_weight, 0.0, 200.0, 400.0, 700.0) * trapezoid(p.logp, -4.0, -1.0, 3.0, 6.0) *
                   falling(p.hbd, 2.0, 7.0) * falling(p.hba, 5.0, 12.0);
  return std::clamp(v, 0.0, 1.0);
}

double proxy_sa(const chem::Molecule& m, const std::set<std::uint64_t>* reference) {
  const double size = std::min(1.0, static_cast<double>(m.heavy_atom_count()) / 50.0);
  const double rings = std::min(1.0, static_cast<double>(m.ring_count()) / 6.0);
  double rarity = 0.0;
  if (reference) {
    const auto envs = chem::morgan_environments(m, 1);
    if (!envs.empty()) {
      std::size_t unseen = 0;
      for (auto e : envs) unseen += !reference->contains(e);
      rarity = static_cast<double>(unseen) / static_cast<double>(envs.size());
    }
  }
  return 1.0 + 9.0 * (0.4 * size + 0.3 * rings + 0.3 * rarity);
}

ProxyPropertyProvider::ProxyPropertyProvider(std::span<const chem::Molecule> reference) : has_reference_(true) {
  for (const auto& m : reference)
    for (auto e : chem::morgan_environments(m, 1)) reference_.insert(e);
}

double ProxyPropertyProvider::sa(const chem::Molecule& m) const {
  return proxy_sa(m, has_reference_ ? &reference_ : nullptr);
}

const PropertyProvider& default_provider() {
  static const ProxyPropertyProvider provider;
  return provider;
}

}  // namespace fragmenta::obj
