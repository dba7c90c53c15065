#include "fragmenta/frag/fragment.hpp"

#include <algorithm>
#include <set>

#include "fragmenta/chem/canonical.hpp"
#include "fragmenta/chem/smiles.hpp"

namespace fragmenta::frag {

Fragment Fragment::from_key(const std::string& key) {
  chem::ParseOptions opts;
  opts.allow_wildcards = true;
  Fragment f;
  f.key_ = key;
  f.graph_ = chem::parse_smiles(key, opts);
  int wildcards = 0;
  for (const auto& a : f.graph_.atoms()) wildcards += a.is_wildcard();
  f.sites_.assign(static_cast<std::size_t>(wildcards), AttachmentSite{});
  for (std::size_t i = 0; i < f.graph_.atom_count(); ++i) {
    const int w = static_cast<int>(i);
    const auto& atom = f.graph_.atom(w);
    if (!atom.is_wildcard()) continue;
    if (atom.site < 1 || atom.site > wildcards || f.graph_.degree(w) != 1)
      throw chem::SyntaxError("fragment key " + key + " has malformed attachment labels");
    auto& site = f.sites_[static_cast<std::size_t>(atom.site - 1)];
    if (site.wildcard >= 0) throw chem::SyntaxError("fragment key " + key + " repeats a site label");
    const auto nb = f.graph_.neighbors(w)[0];
    site = {nb.atom, w, f.graph_.bond(nb.bond).order};
  }
  return f;
}

std::vector<std::string> Decomposition::sorted_keys() const {
  std::vector<std::string> keys;
  for (const auto& inst : fragments) keys.push_back(inst.fragment.key());
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<int> cuttable_bonds(const Molecule& m) {
  std::vector<int> out;
  for (std::size_t i = 0; i < m.bond_count(); ++i) {
    const int b = static_cast<int>(i);
    const auto& bond = m.bond(b);
    if (bond.order != BondOrder::Single || m.is_ring_bond(b)) continue;
    bool ok = true;
    for (int end : {bond.begin, bond.end}) {
      const auto& atom = m.atom(end);
      if (atom.is_wildcard() || (m.degree(end) == 1 && atom.implicit_h == 0)) ok = false;
    }
    if (ok) out.push_back(b);
  }
  return out;
}

Decomposition apply_cuts(const Molecule& m, std::span<const int> cuts) {
  const auto allowed = cuttable_bonds(m);
  std::vector<char> removed(m.bond_count(), 0);
  Decomposition d;
  d.source = m;
  for (int b : cuts) {
    if (!std::binary_search(allowed.begin(), allowed.end(), b))
      throw InvalidCut("bond " + std::to_string(b) + " is not cuttable");
    if (removed[static_cast<std::size_t>(b)]) throw InvalidCut("bond " + std::to_string(b) + " cut twice");
    removed[static_cast<std::size_t>(b)] = 1;
    d.cut_bonds.push_back(b);
  }
  std::sort(d.cut_bonds.begin(), d.cut_bonds.end());

  const auto comp = m.components(removed);
  const int n_comp = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  // (fragment, site) reached through each side of every cut bond.
  std::vector<std::pair<int, int>> begin_side(m.bond_count(), {-1, -1});
  std::vector<std::pair<int, int>> end_side(m.bond_count(), {-1, -1});

  for (int c = 0; c < n_comp; ++c) {
    Molecule piece;
    std::vector<int> piece_source;
    std::vector<int> local(m.atom_count(), -1);
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
      if (comp[i] != c) continue;
      local[i] = piece.add_atom(m.atom(static_cast<int>(i)));
      piece_source.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < m.bond_count(); ++i) {
      const auto& bond = m.bond(static_cast<int>(i));
      if (removed[i] || comp[static_cast<std::size_t>(bond.begin)] != c) continue;
      piece.add_bond(local[static_cast<std::size_t>(bond.begin)], local[static_cast<std::size_t>(bond.end)], bond.order);
    }
    std::vector<int> wildcard_bond(piece.atom_count(), -1);
    for (int b : d.cut_bonds) {
      const auto& bond = m.bond(b);
      for (int end : {bond.begin, bond.end}) {
        if (comp[static_cast<std::size_t>(end)] != c) continue;
        chem::Atom w;
        w.element = chem::Element::Wildcard;
        w.bracket = true;
        const int wi = piece.add_atom(w);
        piece.add_bond(local[static_cast<std::size_t>(end)], wi, bond.order);
        piece_source.push_back(-1);
        wildcard_bond.push_back(b);
      }
    }
    piece.refresh_rings();
    const auto form = chem::canonical_form(piece);
    FragmentInstance inst;
    inst.fragment = Fragment::from_key(form.smiles.str());
    for (int pre : form.output_order) inst.source_atoms.push_back(piece_source[static_cast<std::size_t>(pre)]);
    for (std::size_t k = 0; k < form.site_atoms.size(); ++k) {
      const int pre = form.site_atoms[k];
      const int b = wildcard_bond[static_cast<std::size_t>(pre)];
      // The wildcard hangs off the host; the host's source atom tells the side.
      const int host_source = piece_source[static_cast<std::size_t>(piece.neighbors(pre)[0].atom)];
      auto& side = host_source == m.bond(b).begin ? begin_side : end_side;
      side[static_cast<std::size_t>(b)] = {c, static_cast<int>(k)};
    }
    d.fragments.push_back(std::move(inst));
  }
  for (int b : d.cut_bonds) {
    const auto [fa, sa] = begin_side[static_cast<std::size_t>(b)];
    const auto [fb, sb] = end_side[static_cast<std::size_t>(b)];
    d.connections.push_back({fa, sa, fb, sb, m.bond(b).order, b});
  }
  return d;
}

Molecule reassemble(std::span<const Fragment> fragments, std::span<const Link> links) {
  Molecule out;
  std::vector<std::vector<int>> where(fragments.size());
  for (std::size_t f = 0; f < fragments.size(); ++f) {
    const auto& g = fragments[f].graph();
    where[f].assign(g.atom_count(), -1);
    for (std::size_t i = 0; i < g.atom_count(); ++i)
      if (!g.atom(static_cast<int>(i)).is_wildcard()) where[f][i] = out.add_atom(g.atom(static_cast<int>(i)));
    for (const auto& bond : g.bonds()) {
      const int a = where[f][static_cast<std::size_t>(bond.begin)];
      const int b = where[f][static_cast<std::size_t>(bond.end)];
      if (a >= 0 && b >= 0) out.add_bond(a, b, bond.order);
    }
  }
  std::set<std::pair<int, int>> used;
  auto site_of = [&](int f, int s) -> const AttachmentSite& {
    if (f < 0 || static_cast<std::size_t>(f) >= fragments.size() || s < 0 ||
        s >= fragments[static_cast<std::size_t>(f)].site_count())
      throw std::invalid_argument("link references a missing site");
    if (!used.emplace(f, s).second) throw std::invalid_argument("site linked twice");
    return fragments[static_cast<std::size_t>(f)].sites()[static_cast<std::size_t>(s)];
  };
  for (const auto& link : links) {
    const auto& sa = site_of(link.fragment_a, link.site_a);
    const auto& sb = site_of(link.fragment_b, link.site_b);
    if (sa.order != sb.order) throw std::invalid_argument("linked sites have different bond orders");
    out.add_bond(where[static_cast<std::size_t>(link.fragment_a)][static_cast<std::size_t>(sa.host)],
                 where[static_cast<std::size_t>(link.fragment_b)][static_cast<std::size_t>(sb.host)], sa.order);
  }
  for (std::size_t f = 0; f < fragments.size(); ++f) {
    for (int s = 0; s < fragments[f].site_count(); ++s) {
      if (used.contains({static_cast<int>(f), s})) continue;
      const auto& site = fragments[f].sites()[static_cast<std::size_t>(s)];
      out.atom(where[f][static_cast<std::size_t>(site.host)]).implicit_h += chem::bond_valence(site.order);
    }
  }
  out.refresh_rings();
  return out;
}

Molecule reassemble(const Decomposition& d) {
  std::vector<Fragment> frags;
  for (const auto& inst : d.fragments) frags.push_back(inst.fragment);
  std::vector<Link> links;
  for (const auto& c : d.connections) links.push_back({c.fragment_a, c.site_a, c.fragment_b, c.site_b});
  return reassemble(frags, links);
}

}  // namespace fragmenta::frag
