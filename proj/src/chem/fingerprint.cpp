#include "fragmenta/chem/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <utility>

#include "fragmenta/chem/errors.hpp"
#include "fragmenta/util/rng.hpp"

namespace fragmenta::chem {

Fingerprint::Fingerprint(int width) : width_(width) {
  if (width <= 0) throw std::invalid_argument("fingerprint width must be positive");
  words_.assign(static_cast<std::size_t>((width + 63) / 64), 0);
}

void Fingerprint::set(int bit) {
  words_[static_cast<std::size_t>(bit / 64)] |= std::uint64_t{1} << (bit % 64);
}

bool Fingerprint::test(int bit) const {
  return (words_[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1U;
}

int Fingerprint::count() const noexcept {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::vector<int> Fingerprint::on_bits() const {
  std::vector<int> bits;
  for (int i = 0; i < width_; ++i)
    if (test(i)) bits.push_back(i);
  return bits;
}

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

std::uint64_t atom_invariant(const Molecule& m, int a) {
  const Atom& atom = m.atom(a);
  std::uint64_t h = 0x4d6f7267616eULL;
  h = mix(h, static_cast<std::uint64_t>(atom.element));
  h = mix(h, static_cast<std::uint64_t>(m.degree(a)));
  h = mix(h, static_cast<std::uint64_t>(atom.implicit_h));
  h = mix(h, static_cast<std::uint64_t>(atom.charge + 16));
  h = mix(h, m.rings_current() && m.in_ring(a) ? 1U : 0U);
  h = mix(h, atom.aromatic ? 1U : 0U);
  return h;
}

using BondSet = std::vector<std::uint64_t>;

}  // namespace

std::vector<std::uint64_t> morgan_environments(const Molecule& m, int radius) {
  if (radius < 0) throw std::invalid_argument("fingerprint radius must be >= 0");
  const std::size_t n = m.atom_count();
  const std::size_t words = (m.bond_count() + 63) / 64 + 1;
  std::vector<std::uint64_t> ids(n);
  std::vector<BondSet> cover(n, BondSet(words, 0));
  std::vector<std::uint64_t> out;
  std::set<BondSet> seen;
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = atom_invariant(m, static_cast<int>(i));
    out.push_back(ids[i]);
  }
  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    std::vector<BondSet> next_cover(cover);
    std::vector<std::pair<BondSet, std::uint64_t>> layer;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::pair<int, std::uint64_t>> nbs;
      for (const auto& nb : m.neighbors(static_cast<int>(i))) {
        nbs.emplace_back(static_cast<int>(m.bond(nb.bond).order), ids[static_cast<std::size_t>(nb.atom)]);
        auto& c = next_cover[i];
        c[static_cast<std::size_t>(nb.bond) / 64] |= std::uint64_t{1} << (nb.bond % 64);
        const auto& nc = cover[static_cast<std::size_t>(nb.atom)];
        for (std::size_t w = 0; w < words; ++w) c[w] |= nc[w];
      }
      std::sort(nbs.begin(), nbs.end());
      std::uint64_t h = mix(ids[i], static_cast<std::uint64_t>(r));
      for (const auto& [order, id] : nbs) h = mix(mix(h, static_cast<std::uint64_t>(order)), id);
      next[i] = h;
      if (next_cover[i] != cover[i] && !seen.contains(next_cover[i])) layer.emplace_back(next_cover[i], h);
    }
    for (auto& [bonds, id] : layer) {
      out.push_back(id);
      seen.insert(std::move(bonds));
    }
    ids = std::move(next);
    cover = std::move(next_cover);
  }
  return out;
}

Fingerprint morgan_fingerprint(const Molecule& m, int radius, int width) {
  Fingerprint fp(width);
  for (auto id : morgan_environments(m, radius)) fp.set(static_cast<int>(id % static_cast<std::uint64_t>(width)));
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.width() != b.width())
    throw WidthMismatch("fingerprint widths differ: " + std::to_string(a.width()) + " vs " +
                        std::to_string(b.width()));
  int both = 0;
  int either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += std::popcount(a.words()[i] & b.words()[i]);
    either += std::popcount(a.words()[i] | b.words()[i]);
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace fragmenta::chem
