#include "fragmenta/chem/canonical.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

namespace fragmenta::chem {

namespace {

// Hydrogen count the parser would infer for an organic-subset atom.
int inferred_hydrogens(const Molecule& m, int a) {
  const Atom& atom = m.atom(a);
  int used = m.bond_valence_sum(a);
  if (atom.aromatic) {
    const auto v = fill_valence(atom.element, 0, used);
    if (v && *v - used >= 1) ++used;
  }
  const auto v = fill_valence(atom.element, 0, used);
  return v ? *v - used : -1;
}

void append_atom(std::string& out, const Molecule& m, int a, int site_label) {
  const Atom& atom = m.atom(a);
  if (atom.is_wildcard()) {
    if (site_label > 0) {
      out += "[*:";
      out += std::to_string(site_label);
      out += ']';
    } else {
      out += '*';
    }
    return;
  }
  std::string symbol(element_symbol(atom.element));
  if (atom.aromatic) symbol[0] = static_cast<char>(symbol[0] - 'A' + 'a');
  const bool organic = atom.charge == 0 && is_organic_subset(atom.element) &&
                       inferred_hydrogens(m, a) == atom.implicit_h;
  if (organic) {
    out += symbol;
    return;
  }
  out += '[';
  out += symbol;
  if (atom.implicit_h > 0) {
    out += 'H';
    if (atom.implicit_h > 1) out += std::to_string(atom.implicit_h);
  }
  if (atom.charge != 0) {
    out += atom.charge > 0 ? '+' : '-';
    const int magnitude = std::abs(atom.charge);
    if (magnitude > 1) out += std::to_string(magnitude);
  }
  out += ']';
}

void append_bond(std::string& out, const Molecule& m, int bond) {
  const Bond& b = m.bond(bond);
  switch (b.order) {
    case BondOrder::Aromatic:
      break;
    case BondOrder::Single:
      if (m.atom(b.begin).aromatic && m.atom(b.end).aromatic) out += '-';
      break;
    case BondOrder::Double:
      out += '=';
      break;
    case BondOrder::Triple:
      out += '#';
      break;
  }
}

void append_ring_digit(std::string& out, int digit) {
  if (digit < 10) {
    out += static_cast<char>('0' + digit);
  } else {
    out += '%';
    out += std::to_string(digit);
  }
}

class Writer {
 public:
  Writer(const Molecule& m, std::span<const int> ranks) : m_(m), ranks_(ranks) {
    const std::size_t n = m.atom_count();
    visited_.assign(n, 0);
    bond_seen_.assign(m.bond_count(), 0);
    children_.resize(n);
    child_bond_.resize(n);
    opens_.resize(n);
    closes_.resize(n);
    digit_of_.assign(m.bond_count(), 0);
    digit_used_.fill(0);
  }

  std::string run(std::vector<int>* order) {
    std::string out;
    if (m_.empty()) return out;
    const int start = static_cast<int>(std::min_element(ranks_.begin(), ranks_.end()) - ranks_.begin());
    plan(start, -1);
    emit(start, out);
    if (order) *order = std::move(order_);
    return out;
  }

 private:
  const Molecule& m_;
  std::span<const int> ranks_;
  std::vector<char> visited_;
  std::vector<char> bond_seen_;
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> child_bond_;
  std::vector<std::vector<int>> opens_;
  std::vector<std::vector<int>> closes_;
  std::vector<int> digit_of_;
  std::array<char, 100> digit_used_{};
  std::vector<int> order_;
  int site_counter_ = 0;

  std::vector<Neighbor> sorted_neighbors(int a) const {
    auto nbs = std::vector<Neighbor>(m_.neighbors(a).begin(), m_.neighbors(a).end());
    std::sort(nbs.begin(), nbs.end(), [&](const Neighbor& x, const Neighbor& y) {
      return ranks_[static_cast<std::size_t>(x.atom)] < ranks_[static_cast<std::size_t>(y.atom)];
    });
    return nbs;
  }

  void plan(int a, int parent_bond) {
    visited_[static_cast<std::size_t>(a)] = 1;
    for (const auto& nb : sorted_neighbors(a)) {
      if (nb.bond == parent_bond || bond_seen_[static_cast<std::size_t>(nb.bond)]) continue;
      bond_seen_[static_cast<std::size_t>(nb.bond)] = 1;
      if (visited_[static_cast<std::size_t>(nb.atom)]) {
        opens_[static_cast<std::size_t>(nb.atom)].push_back(nb.bond);
        closes_[static_cast<std::size_t>(a)].push_back(nb.bond);
      } else {
        children_[static_cast<std::size_t>(a)].push_back(nb.atom);
        child_bond_[static_cast<std::size_t>(a)].push_back(nb.bond);
        plan(nb.atom, nb.bond);
      }
    }
  }

  int take_digit() {
    for (int d = 1; d < 100; ++d) {
      if (!digit_used_[static_cast<std::size_t>(d)]) {
        digit_used_[static_cast<std::size_t>(d)] = 1;
        return d;
      }
    }
    throw std::length_error("more than 99 simultaneous ring closures");
  }

  void emit(int a, std::string& out) {
    order_.push_back(a);
    const int label = m_.atom(a).is_wildcard() ? ++site_counter_ : 0;
    append_atom(out, m_, a, label);
    for (int bond : closes_[static_cast<std::size_t>(a)]) {
      const int d = digit_of_[static_cast<std::size_t>(bond)];
      append_ring_digit(out, d);
      digit_used_[static_cast<std::size_t>(d)] = 0;
    }
    for (int bond : opens_[static_cast<std::size_t>(a)]) {
      const int d = take_digit();
      digit_of_[static_cast<std::size_t>(bond)] = d;
      append_bond(out, m_, bond);
      append_ring_digit(out, d);
    }
    const auto& kids = children_[static_cast<std::size_t>(a)];
    const auto& kid_bonds = child_bond_[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const bool last = i + 1 == kids.size();
      if (!last) out += '(';
      append_bond(out, m_, kid_bonds[i]);
      emit(kids[i], out);
      if (!last) out += ')';
    }
  }
};

// --- canonical ranking ---------------------------------------------------------

constexpr long kLeafBudget = 4096;

class Canonicalizer {
 public:
  explicit Canonicalizer(const Molecule& m) : m_(m) {}

  void run() {
    const std::size_t n = m_.atom_count();
    if (n == 0) return;
    std::vector<std::array<int, 7>> inv(n);
    for (std::size_t i = 0; i < n; ++i) {
      const int a = static_cast<int>(i);
      const Atom& atom = m_.atom(a);
      // Degree leads so that chains start from a terminal atom.
      inv[i] = {m_.degree(a),
                static_cast<int>(atom.element),
                atom.aromatic ? 1 : 0,
                atom.charge,
                atom.implicit_h,
                m_.rings_current() ? (m_.in_ring(a) ? 1 : 0) : 0,
                m_.bond_valence_sum(a)};
    }
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return inv[static_cast<std::size_t>(x)] < inv[static_cast<std::size_t>(y)]; });
    std::vector<int> cls(n);
    int c = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0 && inv[static_cast<std::size_t>(idx[k])] != inv[static_cast<std::size_t>(idx[k - 1])]) ++c;
      cls[static_cast<std::size_t>(idx[k])] = c;
    }
    search(std::move(cls));
  }

  std::string best;
  std::vector<int> best_ranks;
  std::vector<int> best_order;

 private:
  const Molecule& m_;
  long leaves_ = 0;

  // Iterated neighbourhood refinement until the partition stops splitting.
  std::vector<int> refine(std::vector<int> cls) const {
    const std::size_t n = cls.size();
    std::vector<std::vector<long>> sig(n);
    std::vector<int> idx(n);
    int classes = -1;
    while (true) {
      for (std::size_t i = 0; i < n; ++i) {
        auto& s = sig[i];
        s.clear();
        s.push_back(cls[i]);
        const std::size_t first = s.size();
        for (const auto& nb : m_.neighbors(static_cast<int>(i)))
          s.push_back(static_cast<long>(cls[static_cast<std::size_t>(nb.atom)]) * 8 +
                      static_cast<long>(m_.bond(nb.bond).order));
        std::sort(s.begin() + static_cast<long>(first), s.end());
      }
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](int x, int y) { return sig[static_cast<std::size_t>(x)] < sig[static_cast<std::size_t>(y)]; });
      std::vector<int> next(n);
      int c = 0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && sig[static_cast<std::size_t>(idx[k])] != sig[static_cast<std::size_t>(idx[k - 1])]) ++c;
        next[static_cast<std::size_t>(idx[k])] = c;
      }
      const int count = c + 1;
      cls = std::move(next);
      if (count == classes) return cls;
      classes = count;
    }
  }

  void search(std::vector<int> cls) {
    if (leaves_ >= kLeafBudget && !best.empty()) return;
    cls = refine(std::move(cls));
    const std::size_t n = cls.size();
    std::vector<int> count(n, 0);
    for (int c : cls) ++count[static_cast<std::size_t>(c)];
    int tied = -1;
    for (std::size_t c = 0; c < n; ++c) {
      if (count[c] >= 2) {
        tied = static_cast<int>(c);
        break;
      }
    }
    if (tied < 0) {
      ++leaves_;
      std::vector<int> order;
      std::string s = write_smiles(m_, cls, &order);
      // Shorter strings (fewer branches) win before lexicographic order.
      if (best.empty() || s.size() < best.size() || (s.size() == best.size() && s < best)) {
        best = std::move(s);
        best_ranks = cls;
        best_order = std::move(order);
      }
      return;
    }
    // Terminal atoms in the same class hanging off the same neighbour by the
    // same bond are interchangeable; one representative suffices.
    std::vector<int> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (cls[i] != tied) continue;
      const int a = static_cast<int>(i);
      bool twin = false;
      if (m_.degree(a) == 1) {
        const Neighbor nb = m_.neighbors(a)[0];
        for (int prior : members) {
          if (m_.degree(prior) == 1 && m_.neighbors(prior)[0].atom == nb.atom &&
              m_.bond(m_.neighbors(prior)[0].bond).order == m_.bond(nb.bond).order) {
            twin = true;
            break;
          }
        }
      }
      if (!twin) members.push_back(a);
    }
    for (int chosen : members) {
      std::vector<int> split(n);
      for (std::size_t i = 0; i < n; ++i)
        split[i] = 2 * cls[i] + ((cls[i] == tied && static_cast<int>(i) != chosen) ? 1 : 0);
      search(std::move(split));
      if (leaves_ >= kLeafBudget) break;
    }
  }
};

}  // namespace

std::string write_smiles(const Molecule& m, std::span<const int> ranks, std::vector<int>* output_order) {
  return Writer(m, ranks).run(output_order);
}

CanonicalForm canonical_form(const Molecule& m) {
  Canonicalizer c(m);
  c.run();
  CanonicalForm form;
  form.smiles = CanonicalSmiles(std::move(c.best));
  form.output_order = std::move(c.best_order);
  for (int a : form.output_order)
    if (m.atom(a).is_wildcard()) form.site_atoms.push_back(a);
  return form;
}

CanonicalSmiles write_canonical(const Molecule& m) { return canonical_form(m).smiles; }

std::vector<int> canonical_ranks(const Molecule& m) {
  Canonicalizer c(m);
  c.run();
  return c.best_ranks;
}

}  // namespace fragmenta::chem
