#include "fragmenta/chem/molecule.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fragmenta/chem/errors.hpp"

namespace fragmenta::chem {

int Molecule::add_atom(const Atom& atom) {
  atoms_.push_back(atom);
  adjacency_.emplace_back();
  rings_current_ = false;
  return static_cast<int>(atoms_.size()) - 1;
}

int Molecule::add_bond(int a, int b, BondOrder order) {
  const int n = static_cast<int>(atoms_.size());
  if (a < 0 || b < 0 || a >= n || b >= n) throw std::out_of_range("add_bond: atom index");
  if (a == b) throw std::invalid_argument("add_bond: self loop");
  if (bond_between(a, b) >= 0) throw std::invalid_argument("add_bond: duplicate bond");
  const int id = static_cast<int>(bonds_.size());
  bonds_.push_back({a, b, order});
  adjacency_[static_cast<std::size_t>(a)].push_back({b, id});
  adjacency_[static_cast<std::size_t>(b)].push_back({a, id});
  rings_current_ = false;
  return id;
}

int Molecule::bond_between(int a, int b) const {
  for (const auto& nb : neighbors(a))
    if (nb.atom == b) return nb.bond;
  return -1;
}

int Molecule::bond_valence_sum(int atom) const {
  int sum = 0;
  for (const auto& nb : neighbors(atom)) sum += bond_valence(bonds_[nb.bond].order);
  return sum;
}

// Bridges via iterative Tarjan lowlink; every non-bridge lies on a cycle.
void Molecule::refresh_rings() {
  const std::size_t n = atoms_.size();
  ring_bond_.assign(bonds_.size(), 1);
  ring_atom_.assign(n, 0);
  std::vector<int> disc(n, -1), low(n, 0);
  int timer = 0;
  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (std::size_t root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    stack.push_back({static_cast<int>(root), -1, 0});
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& adj = adjacency_[static_cast<std::size_t>(f.atom)];
      if (f.next < adj.size()) {
        const Neighbor nb = adj[f.next++];
        if (nb.bond == f.parent_bond) continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const int parent = stack.back().atom;
          low[parent] = std::min(low[parent], low[done.atom]);
          if (low[done.atom] > disc[parent]) ring_bond_[static_cast<std::size_t>(done.parent_bond)] = 0;
        }
      }
    }
  }
  for (std::size_t b = 0; b < bonds_.size(); ++b) {
    if (!ring_bond_[b]) continue;
    ring_atom_[static_cast<std::size_t>(bonds_[b].begin)] = 1;
    ring_atom_[static_cast<std::size_t>(bonds_[b].end)] = 1;
  }
  rings_current_ = true;
}

bool Molecule::is_ring_bond(int bond) const {
  if (!rings_current_) throw std::logic_error("ring info is stale; call refresh_rings()");
  return ring_bond_[static_cast<std::size_t>(bond)] != 0;
}

bool Molecule::in_ring(int atom) const {
  if (!rings_current_) throw std::logic_error("ring info is stale; call refresh_rings()");
  return ring_atom_[static_cast<std::size_t>(atom)] != 0;
}

int Molecule::ring_count() const {
  if (atoms_.empty()) return 0;
  const auto comp = components();
  const int ncomp = *std::max_element(comp.begin(), comp.end()) + 1;
  return static_cast<int>(bonds_.size()) - static_cast<int>(atoms_.size()) + ncomp;
}

std::vector<int> Molecule::components(std::span<const char> removed_bonds) const {
  std::vector<int> comp(atoms_.size(), -1);
  int next = 0;
  std::vector<int> queue;
  for (std::size_t s = 0; s < atoms_.size(); ++s) {
    if (comp[s] >= 0) continue;
    comp[s] = next;
    queue.assign(1, static_cast<int>(s));
    while (!queue.empty()) {
      const int a = queue.back();
      queue.pop_back();
      for (const auto& nb : neighbors(a)) {
        if (!removed_bonds.empty() && removed_bonds[static_cast<std::size_t>(nb.bond)]) continue;
        if (comp[static_cast<std::size_t>(nb.atom)] >= 0) continue;
        comp[static_cast<std::size_t>(nb.atom)] = next;
        queue.push_back(nb.atom);
      }
    }
    ++next;
  }
  return comp;
}

bool Molecule::is_connected() const {
  if (atoms_.empty()) return true;
  const auto comp = components();
  return std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; });
}

Molecule Molecule::without_atoms(std::span<const char> drop, std::vector<int>* index_map) const {
  Molecule out;
  std::vector<int> map(atoms_.size(), -1);
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (!drop[i]) map[i] = out.add_atom(atoms_[i]);
  for (const auto& b : bonds_) {
    const int a = map[static_cast<std::size_t>(b.begin)];
    const int c = map[static_cast<std::size_t>(b.end)];
    if (a >= 0 && c >= 0) out.add_bond(a, c, b.order);
  }
  if (index_map) *index_map = std::move(map);
  out.refresh_rings();
  return out;
}

std::size_t Molecule::heavy_atom_count() const {
  return static_cast<std::size_t>(
      std::count_if(atoms_.begin(), atoms_.end(), [](const Atom& a) { return !a.is_wildcard(); }));
}

// --- kekulization -----------------------------------------------------------

namespace {

constexpr long kKekuleBudget = 200000;

struct KekuleSearch {
  const Molecule& m;
  std::vector<char> open;      // atom still needs its double bond
  std::vector<char> is_double;  // per bond
  long steps = 0;

  int options(int a) const {
    int count = 0;
    for (const auto& nb : m.neighbors(a))
      if (m.bond(nb.bond).order == BondOrder::Aromatic && open[static_cast<std::size_t>(nb.atom)]) ++count;
    return count;
  }

  bool solve() {
    if (++steps > kKekuleBudget) return false;
    int best = -1;
    int best_options = 1 << 30;
    for (std::size_t a = 0; a < open.size(); ++a) {
      if (!open[a]) continue;
      const int o = options(static_cast<int>(a));
      if (o == 0) return false;
      if (o < best_options) {
        best_options = o;
        best = static_cast<int>(a);
      }
    }
    if (best < 0) return true;
    open[static_cast<std::size_t>(best)] = 0;
    for (const auto& nb : m.neighbors(best)) {
      if (m.bond(nb.bond).order != BondOrder::Aromatic || !open[static_cast<std::size_t>(nb.atom)]) continue;
      open[static_cast<std::size_t>(nb.atom)] = 0;
      is_double[static_cast<std::size_t>(nb.bond)] = 1;
      if (solve()) return true;
      is_double[static_cast<std::size_t>(nb.bond)] = 0;
      open[static_cast<std::size_t>(nb.atom)] = 1;
      if (steps > kKekuleBudget) break;
    }
    open[static_cast<std::size_t>(best)] = 1;
    return false;
  }
};

bool contains(std::span<const int> values, int v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

}  // namespace

bool kekulize(Molecule& m, std::span<const char> needs_double) {
  KekuleSearch search{m, std::vector<char>(needs_double.begin(), needs_double.end()),
                      std::vector<char>(m.bond_count(), 0)};
  if (!search.solve()) return false;
  for (std::size_t b = 0; b < m.bond_count(); ++b) {
    Bond& bond = m.bond(static_cast<int>(b));
    if (bond.order == BondOrder::Aromatic)
      bond.order = search.is_double[b] ? BondOrder::Double : BondOrder::Single;
  }
  return true;
}

std::vector<char> aromatic_pi_demand(const Molecule& m) {
  std::vector<char> needs(m.atom_count(), 0);
  for (std::size_t i = 0; i < m.atom_count(); ++i) {
    const Atom& a = m.atom(static_cast<int>(i));
    if (!a.aromatic) continue;
    const int used = m.bond_valence_sum(static_cast<int>(i)) + a.implicit_h;
    const auto allowed = allowed_valences(a.element, a.charge);
    needs[i] = !contains(allowed, used) && contains(allowed, used + 1);
  }
  return needs;
}

// --- aromaticity perception ---------------------------------------------------

namespace {

struct Ring {
  std::vector<int> atoms;
  std::vector<int> bonds;
};

void find_small_rings(const Molecule& m, std::vector<Ring>& rings) {
  const int n = static_cast<int>(m.atom_count());
  std::vector<int> path;
  std::vector<int> path_bonds;
  std::vector<char> on_path(m.atom_count(), 0);

  // Depth-first walk over ring bonds, only through atoms with index > start,
  // closing back to start. Each cycle is seen twice; keep one orientation.
  auto extend = [&](auto&& self, int start, int atom) -> void {
    for (const auto& nb : m.neighbors(atom)) {
      if (!m.is_ring_bond(nb.bond)) continue;
      if (nb.atom == start && path.size() >= 5) {
        if (path[1] < path.back()) {
          Ring r{path, path_bonds};
          r.bonds.push_back(nb.bond);
          rings.push_back(std::move(r));
        }
        continue;
      }
      if (nb.atom <= start || on_path[static_cast<std::size_t>(nb.atom)] || path.size() >= 6) continue;
      on_path[static_cast<std::size_t>(nb.atom)] = 1;
      path.push_back(nb.atom);
      path_bonds.push_back(nb.bond);
      self(self, start, nb.atom);
      path.pop_back();
      path_bonds.pop_back();
      on_path[static_cast<std::size_t>(nb.atom)] = 0;
    }
  };

  for (int s = 0; s < n; ++s) {
    if (!m.in_ring(s)) continue;
    path.assign(1, s);
    path_bonds.clear();
    on_path[static_cast<std::size_t>(s)] = 1;
    extend(extend, s, s);
    on_path[static_cast<std::size_t>(s)] = 0;
  }
}

// Pi electrons contributed by `atom` to `ring`, or -1 when the atom rules the
// ring out.
int pi_electrons(const Molecule& m, int atom, const std::vector<char>& in_ring_bond,
                 const std::vector<char>& aromatic_bond) {
  const Atom& a = m.atom(atom);
  int doubles = 0;
  bool counted = false;
  for (const auto& nb : m.neighbors(atom)) {
    const BondOrder o = m.bond(nb.bond).order;
    if (o == BondOrder::Triple || o == BondOrder::Aromatic) return -1;
    if (o != BondOrder::Double) continue;
    ++doubles;
    if (in_ring_bond[static_cast<std::size_t>(nb.bond)] || aromatic_bond[static_cast<std::size_t>(nb.bond)])
      counted = true;
  }
  if (doubles > 1) return -1;
  if (doubles == 1) return counted ? 1 : -1;
  const int connections = m.degree(atom) + a.implicit_h;
  switch (a.element) {
    case Element::N:
    case Element::P:
      if (a.charge == 0 && connections == 3) return 2;
      if (a.charge == -1 && connections == 2) return 2;
      return -1;
    case Element::O:
    case Element::S:
      return (a.charge == 0 && m.degree(atom) == 2 && a.implicit_h == 0) ? 2 : -1;
    case Element::C:
      return a.charge == -1 ? 2 : -1;
    default:
      return -1;
  }
}

}  // namespace

void perceive_aromaticity(Molecule& m) {
  if (!m.rings_current()) m.refresh_rings();
  for (std::size_t i = 0; i < m.atom_count(); ++i) m.atom(static_cast<int>(i)).aromatic = false;

  std::vector<Ring> rings;
  find_small_rings(m, rings);
  if (rings.empty()) return;

  std::vector<char> aromatic_bond(m.bond_count(), 0);
  std::vector<char> ring_done(rings.size(), 0);
  std::vector<char> in_ring_bond(m.bond_count(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < rings.size(); ++r) {
      if (ring_done[r]) continue;
      for (int b : rings[r].bonds) in_ring_bond[static_cast<std::size_t>(b)] = 1;
      int electrons = 0;
      bool ok = true;
      for (int a : rings[r].atoms) {
        const int e = pi_electrons(m, a, in_ring_bond, aromatic_bond);
        if (e < 0) {
          ok = false;
          break;
        }
        electrons += e;
      }
      for (int b : rings[r].bonds) in_ring_bond[static_cast<std::size_t>(b)] = 0;
      if (ok && electrons >= 2 && (electrons - 2) % 4 == 0) {
        ring_done[r] = 1;
        for (int b : rings[r].bonds) aromatic_bond[static_cast<std::size_t>(b)] = 1;
        changed = true;
      }
    }
  }
  for (std::size_t b = 0; b < m.bond_count(); ++b) {
    if (!aromatic_bond[b]) continue;
    Bond& bond = m.bond(static_cast<int>(b));
    bond.order = BondOrder::Aromatic;
    m.atom(bond.begin).aromatic = true;
    m.atom(bond.end).aromatic = true;
  }
}

// --- validation -----------------------------------------------------------------

void validate_valence(const Molecule& m) {
  bool any_aromatic = false;
  for (std::size_t i = 0; i < m.atom_count(); ++i) {
    const Atom& a = m.atom(static_cast<int>(i));
    if (a.is_wildcard()) continue;
    const auto allowed = allowed_valences(a.element, a.charge);
    if (allowed.empty())
      throw ValenceError("atom " + std::to_string(i) + ": unsupported charge state for " +
                         std::string(element_symbol(a.element)));
    if (a.implicit_h < 0) throw ValenceError("atom " + std::to_string(i) + ": negative hydrogen count");
    int used = m.bond_valence_sum(static_cast<int>(i)) + a.implicit_h;
    if (a.aromatic) {
      any_aromatic = true;
      if (!contains(allowed, used) && contains(allowed, used + 1)) ++used;
    }
    if (used > allowed.back())
      throw ValenceError("atom " + std::to_string(i) + " (" + std::string(element_symbol(a.element)) +
                         ") exceeds allowed valence");
  }
  if (!any_aromatic) return;
  Molecule copy = m;
  if (!kekulize(copy, aromatic_pi_demand(m)))
    throw ValenceError("aromatic system cannot be kekulized");
}

bool is_valence_valid(const Molecule& m) {
  try {
    validate_valence(m);
    return true;
  } catch (const ValenceError&) {
    return false;
  }
}

}  // namespace fragmenta::chem
