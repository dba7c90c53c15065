#include "support/oracles.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace oracle {

using fragmenta::chem::Atom;
using fragmenta::chem::BondOrder;

namespace {

bool same_atom(const Atom& x, const Atom& y) {
  return x.element == y.element && x.charge == y.charge && x.aromatic == y.aromatic &&
         x.implicit_h == y.implicit_h;
}

int order_between(const Molecule& m, int a, int b) {
  const int bond = m.bond_between(a, b);
  return bond < 0 ? 0 : static_cast<int>(m.bond(bond).order);
}

bool extend_iso(const Molecule& a, const Molecule& b, std::vector<int>& map, std::vector<char>& used,
                std::size_t i) {
  if (i == a.atom_count()) return true;
  const int ai = static_cast<int>(i);
  for (std::size_t j = 0; j < b.atom_count(); ++j) {
    const int bj = static_cast<int>(j);
    if (used[j] || !same_atom(a.atom(ai), b.atom(bj)) || a.degree(ai) != b.degree(bj)) continue;
    bool ok = true;
    for (std::size_t k = 0; k < i && ok; ++k)
      ok = order_between(a, ai, static_cast<int>(k)) == order_between(b, bj, map[k]);
    if (!ok) continue;
    map[i] = bj;
    used[j] = 1;
    if (extend_iso(a, b, map, used, i + 1)) return true;
    used[j] = 0;
  }
  return false;
}

bool atom_ok(const Atom& p, const Atom& t) {
  if (p.is_wildcard()) return true;
  if (p.element != t.element || p.aromatic != t.aromatic) return false;
  if (p.bracket) return p.implicit_h == t.implicit_h && p.charge == t.charge;
  return true;
}

bool bond_ok(int p, int t) {
  if (p == 0) return true;
  if (t == 0) return false;
  return p == t || (p == static_cast<int>(BondOrder::Single) && t == static_cast<int>(BondOrder::Aromatic));
}

bool extend_sub(const Molecule& p, const Molecule& t, std::vector<int>& map, std::vector<char>& used,
                std::size_t i) {
  if (i == p.atom_count()) return true;
  const int pi = static_cast<int>(i);
  for (std::size_t j = 0; j < t.atom_count(); ++j) {
    if (used[j] || !atom_ok(p.atom(pi), t.atom(static_cast<int>(j)))) continue;
    bool ok = true;
    for (std::size_t k = 0; k < i && ok; ++k)
      ok = bond_ok(order_between(p, pi, static_cast<int>(k)), order_between(t, static_cast<int>(j), map[k]));
    if (!ok) continue;
    map[i] = static_cast<int>(j);
    used[j] = 1;
    if (extend_sub(p, t, map, used, i + 1)) return true;
    used[j] = 0;
  }
  return false;
}

}  // namespace

bool isomorphic(const Molecule& a, const Molecule& b) {
  if (a.atom_count() != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  std::vector<int> map(a.atom_count(), -1);
  std::vector<char> used(b.atom_count(), 0);
  return extend_iso(a, b, map, used, 0);
}

bool brute_force_substructure(const Molecule& pattern, const Molecule& target) {
  if (pattern.atom_count() > target.atom_count()) return false;
  std::vector<int> map(pattern.atom_count(), -1);
  std::vector<char> used(target.atom_count(), 0);
  return extend_sub(pattern, target, map, used, 0);
}

Molecule permute(const Molecule& m, const std::vector<int>& perm, const std::vector<int>& bond_perm) {
  std::vector<int> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  Molecule out;
  for (int old : inverse) out.add_atom(m.atom(old));
  for (int b : bond_perm) {
    const auto& bond = m.bond(b);
    out.add_bond(perm[static_cast<std::size_t>(bond.begin)], perm[static_cast<std::size_t>(bond.end)], bond.order);
  }
  out.refresh_rings();
  return out;
}

Molecule shuffled(const Molecule& m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> perm(m.atom_count());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> bonds(m.bond_count());
  std::iota(bonds.begin(), bonds.end(), 0);
  std::shuffle(bonds.begin(), bonds.end(), rng);
  return permute(m, perm, bonds);
}

}  // namespace oracle

#include <algorithm>
#include <cmath>

#include "fragmenta/frag/fragment.hpp"

namespace oracle {

double naive_mfr(const std::string& key, int site_count, const fragmenta::qlearn::QTable& q) {
  double total = 0.0;
  for (int s = 0; s < site_count; ++s) {
    double site = 0.0;
    for (const auto& [k, e] : q.entries())
      if ((k.a == key && k.site_a == s) || (k.b == key && k.site_b == s)) site += e.q;
    total += std::max(site, q.epsilon());
  }
  return total;
}

std::vector<std::vector<int>> all_subsets(const std::vector<int>& items, int max_size) {
  std::vector<std::vector<int>> out;
  const std::size_t n = items.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<int> s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1U) s.push_back(items[i]);
    if (static_cast<int>(s.size()) <= max_size) out.push_back(std::move(s));
  }
  return out;
}

std::vector<int> brute_force_best_cuts(const Molecule& m, const fragmenta::qlearn::QTable& q, int max_cuts) {
  struct Cand {
    std::vector<int> cuts;
    double score;
    std::vector<std::string> keys;
  };
  std::vector<Cand> cands;
  for (auto& cuts : all_subsets(fragmenta::frag::cuttable_bonds(m), max_cuts)) {
    const auto d = fragmenta::frag::apply_cuts(m, cuts);
    double score = 0.0;
    for (const auto& inst : d.fragments) score += naive_mfr(inst.fragment.key(), inst.fragment.site_count(), q);
    std::sort(cuts.begin(), cuts.end());
    cands.push_back({cuts, score, d.sorted_keys()});
  }
  double top = -1e300;
  for (const auto& c : cands) top = std::max(top, c.score);
  const Cand* best = nullptr;
  for (const auto& c : cands) {
    if (std::abs(c.score - top) > 1e-12) continue;
    if (!best || c.cuts.size() < best->cuts.size() ||
        (c.cuts.size() == best->cuts.size() && c.keys < best->keys))
      best = &c;
  }
  return best->cuts;
}

}  // namespace oracle

namespace oracle {

double tanimoto(const std::vector<int>& a, const std::vector<int>& b) {
  std::set<int> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::size_t inter = 0;
  for (auto x : sa) inter += sb.count(x);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double mean_pairwise_distance(const std::vector<std::vector<int>>& bits) {
  if (bits.size() < 2) return 0.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < bits.size(); ++i)
    for (std::size_t j = i + 1; j < bits.size(); ++j) {
      sum += 1.0 - tanimoto(bits[i], bits[j]);
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

double chamfer(const std::vector<std::vector<int>>& generated,
               const std::vector<std::vector<int>>& reference) {
  if (generated.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& g : generated) {
    double best = 1.0;
    for (const auto& r : reference) best = std::min(best, 1.0 - tanimoto(g, r));
    sum += best;
  }
  return sum / static_cast<double>(generated.size());
}

}  // namespace oracle
