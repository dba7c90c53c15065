#include "fragmenta/chem/properties.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fragmenta_logp_table.hpp"

namespace fragmenta::chem {

LogpTable LogpTable::parse(std::string_view text) {
  LogpTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    if (key == "version") {
      if (!(fields >> table.version_)) throw std::runtime_error("logP table line " + std::to_string(line_no) + ": bad version");
      continue;
    }
    double value = 0.0;
    if (!(fields >> value)) throw std::runtime_error("logP table line " + std::to_string(line_no) + ": missing value for " + key);
    table.values_[key] = value;
  }
  if (table.version_ != 1) throw std::runtime_error("logP table: unsupported version " + std::to_string(table.version_));
  return table;
}

LogpTable LogpTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open logP table " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

const LogpTable& LogpTable::builtin() {
  static const LogpTable table = parse(detail::kEmbeddedLogpTable);
  return table;
}

std::optional<double> LogpTable::lookup(std::string_view atom_class) const {
  std::string_view key = atom_class;
  while (true) {
    if (auto it = values_.find(key); it != values_.end()) return it->second;
    const auto dot = key.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    key = key.substr(0, dot);
  }
}

namespace {

std::string atom_symbol(const Atom& a) {
  std::string s(element_symbol(a.element));
  if (a.aromatic) s[0] = static_cast<char>(s[0] - 'A' + 'a');
  return s;
}

}  // namespace

std::string logp_atom_class(const Molecule& m, int a) {
  const Atom& atom = m.atom(a);
  std::string cls = atom_symbol(atom);
  if (atom.charge != 0) return cls + ".charged";
  if (atom.aromatic) {
    if (atom.element == Element::C) {
      for (const auto& nb : m.neighbors(a))
        if (is_heteroatom(m.atom(nb.atom).element)) return cls + ".x";
    }
    return cls;
  }
  int max_order = 1;
  bool hetero = false;
  for (const auto& nb : m.neighbors(a)) {
    const auto order = m.bond(nb.bond).order;
    if (order == BondOrder::Double) max_order = std::max(max_order, 2);
    if (order == BondOrder::Triple) max_order = 3;
    if (is_heteroatom(m.atom(nb.atom).element)) hetero = true;
  }
  if (max_order == 2) cls += ".sp2";
  if (max_order == 3) cls += ".sp";
  if (atom.element == Element::O && max_order == 1 && atom.implicit_h == 0 && m.degree(a) == 2) cls += ".ether";
  if (atom.element == Element::C && hetero) cls += ".x";
  return cls;
}

PropertyVector properties(const Molecule& m, const LogpTable& table) {
  PropertyVector p;
  for (std::size_t i = 0; i < m.atom_count(); ++i) {
    const int a = static_cast<int>(i);
    const Atom& atom = m.atom(a);
    if (atom.is_wildcard()) continue;
    p.mol_weight += atomic_weight(atom.element) + atom.implicit_h * atomic_weight(Element::H);
    if (auto v = table.lookup(logp_atom_class(m, a))) {
      p.logp += *v;
    } else {
      p.logp_incomplete = true;
    }
    if (atom.implicit_h > 0) {
      if (auto h = table.lookup("H." + atom_symbol(atom))) {
        p.logp += atom.implicit_h * *h;
      } else {
        p.logp_incomplete = true;
      }
    }
    if (atom.element == Element::N || atom.element == Element::O) {
      ++p.hba;
      if (atom.implicit_h > 0) ++p.hbd;
    }
  }
  for (std::size_t b = 0; b < m.bond_count(); ++b) {
    const Bond& bond = m.bond(static_cast<int>(b));
    if (bond.order != BondOrder::Single || m.is_ring_bond(static_cast<int>(b))) continue;
    if (m.atom(bond.begin).is_wildcard() || m.atom(bond.end).is_wildcard()) continue;
    if (m.degree(bond.begin) >= 2 && m.degree(bond.end) >= 2) ++p.rotatable_bonds;
  }
  return p;
}

bool lipinski_pass(const PropertyVector& p) {
  return p.mol_weight <= 500.0 && p.logp <= 5.0 && p.hbd <= 5 && p.hba <= 10;
}

std::optional<CanonicalSmiles> murcko_scaffold(const Molecule& m) {
  if (m.empty() || m.ring_count() == 0) return std::nullopt;
  Molecule work = m;
  std::vector<char> dropped(m.atom_count(), 0);
  std::vector<int> live_degree(m.atom_count());
  for (std::size_t i = 0; i < m.atom_count(); ++i) live_degree[i] = m.degree(static_cast<int>(i));
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < m.atom_count(); ++i) {
      const int a = static_cast<int>(i);
      if (dropped[i] || m.in_ring(a) || live_degree[i] > 1) continue;
      dropped[i] = 1;
      changed = true;
      for (const auto& nb : m.neighbors(a)) {
        if (dropped[static_cast<std::size_t>(nb.atom)]) continue;
        --live_degree[static_cast<std::size_t>(nb.atom)];
        if (!work.atom(nb.atom).is_wildcard())
          work.atom(nb.atom).implicit_h += bond_valence(m.bond(nb.bond).order);
      }
    }
  }
  Molecule core = work.without_atoms(dropped);
  if (core.empty()) return std::nullopt;
  return write_canonical(core);
}

}  // namespace fragmenta::chem
