#include "fragmenta/chem/substructure.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace fragmenta::chem {

bool atoms_compatible(const Atom& p, const Atom& t) {
  if (p.is_wildcard()) return true;
  if (p.element != t.element || p.aromatic != t.aromatic) return false;
  if (p.bracket && (p.implicit_h != t.implicit_h || p.charge != t.charge)) return false;
  return true;
}

bool bonds_compatible(BondOrder p, BondOrder t) {
  return p == t || (p == BondOrder::Single && t == BondOrder::Aromatic);
}

namespace {

class Matcher {
 public:
  Matcher(const Molecule& p, const Molecule& t) : p_(p), t_(t) {
    if (p.atom_count() > kMaxPatternAtoms)
      throw std::invalid_argument("substructure pattern has more than 32 atoms");
    plan_order();
    map_.assign(p.atom_count(), -1);
    used_.assign(t.atom_count(), 0);
  }

  // Calls visit(map) for each monomorphism until it returns false.
  template <typename Visit>
  void run(Visit&& visit) {
    if (p_.atom_count() > t_.atom_count()) return;
    if (p_.empty()) {
      visit(map_);
      return;
    }
    extend(0, visit);
  }

 private:
  const Molecule& p_;
  const Molecule& t_;
  std::vector<int> order_;
  std::vector<int> map_;
  std::vector<char> used_;
  bool stop_ = false;

  // Connected-first ordering so every atom after the first in its component
  // has an already mapped neighbour.
  void plan_order() {
    const std::size_t n = p_.atom_count();
    std::vector<char> placed(n, 0);
    for (std::size_t root = 0; root < n; ++root) {
      if (placed[root]) continue;
      std::vector<int> frontier{static_cast<int>(root)};
      placed[root] = 1;
      for (std::size_t k = 0; k < frontier.size(); ++k) {
        const int a = frontier[k];
        order_.push_back(a);
        for (const auto& nb : p_.neighbors(a)) {
          if (!placed[static_cast<std::size_t>(nb.atom)]) {
            placed[static_cast<std::size_t>(nb.atom)] = 1;
            frontier.push_back(nb.atom);
          }
        }
      }
    }
  }

  bool feasible(int pa, int ta) const {
    if (used_[static_cast<std::size_t>(ta)]) return false;
    if (!atoms_compatible(p_.atom(pa), t_.atom(ta))) return false;
    if (!p_.atom(pa).is_wildcard() && p_.degree(pa) > t_.degree(ta)) return false;
    for (const auto& nb : p_.neighbors(pa)) {
      const int mapped = map_[static_cast<std::size_t>(nb.atom)];
      if (mapped < 0) continue;
      const int tb = t_.bond_between(ta, mapped);
      if (tb < 0 || !bonds_compatible(p_.bond(nb.bond).order, t_.bond(tb).order)) return false;
    }
    return true;
  }

  template <typename Visit>
  void extend(std::size_t depth, Visit& visit) {
    if (depth == order_.size()) {
      if (!visit(map_)) stop_ = true;
      return;
    }
    const int pa = order_[depth];
    // Candidates come from a mapped neighbour's adjacency when there is one.
    int anchor = -1;
    for (const auto& nb : p_.neighbors(pa)) {
      if (map_[static_cast<std::size_t>(nb.atom)] >= 0) {
        anchor = map_[static_cast<std::size_t>(nb.atom)];
        break;
      }
    }
    auto attempt = [&](int ta) {
      if (!feasible(pa, ta)) return;
      map_[static_cast<std::size_t>(pa)] = ta;
      used_[static_cast<std::size_t>(ta)] = 1;
      extend(depth + 1, visit);
      used_[static_cast<std::size_t>(ta)] = 0;
      map_[static_cast<std::size_t>(pa)] = -1;
    };
    if (anchor >= 0) {
      for (const auto& tn : t_.neighbors(anchor)) {
        attempt(tn.atom);
        if (stop_) return;
      }
    } else {
      for (std::size_t ta = 0; ta < t_.atom_count(); ++ta) {
        attempt(static_cast<int>(ta));
        if (stop_) return;
      }
    }
  }
};

}  // namespace

std::optional<std::vector<int>> find_substructure(const Molecule& pattern, const Molecule& target) {
  std::optional<std::vector<int>> found;
  Matcher(pattern, target).run([&](const std::vector<int>& map) {
    found = map;
    return false;
  });
  return found;
}

bool match_substructure(const Molecule& pattern, const Molecule& target) {
  return find_substructure(pattern, target).has_value();
}

std::size_t count_matches(const Molecule& pattern, const Molecule& target) {
  std::set<std::vector<int>> sets;
  Matcher(pattern, target).run([&](const std::vector<int>& map) {
    std::vector<int> key(map);
    std::sort(key.begin(), key.end());
    sets.insert(std::move(key));
    return true;
  });
  return sets.size();
}

}  // namespace fragmenta::chem
