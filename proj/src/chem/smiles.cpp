#include "fragmenta/chem/smiles.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace fragmenta::chem {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : s_(text), opt_(options) {}

  Molecule run() {
    if (s_.empty()) throw SyntaxError("empty SMILES", 0);
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const auto c = static_cast<unsigned char>(s_[i]);
      if (c >= 128) throw SyntaxError("non-ASCII character", i);
    }
    while (pos_ < s_.size()) step();
    if (!branches_.empty()) throw SyntaxError("unclosed branch", s_.size());
    if (pending_) throw SyntaxError("dangling bond symbol", pending_pos_);
    if (!rings_.empty())
      throw SyntaxError("unclosed ring bond " + std::to_string(rings_.begin()->first),
                        rings_.begin()->second.pos);
    if (m_.empty()) throw SyntaxError("no atoms", 0);
    finish();
    return std::move(m_);
  }

 private:
  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
    std::size_t pos;
  };

  std::string_view s_;
  ParseOptions opt_;
  std::size_t pos_ = 0;
  Molecule m_;
  int prev_ = -1;
  bool after_atom_ = false;  // last token was an atom or ring-closure digit
  std::optional<BondOrder> pending_;
  std::size_t pending_pos_ = 0;
  std::vector<std::pair<int, int>> branches_;  // (atom before '(', atom count at '(')
  std::map<int, OpenRing> rings_;

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }

  void step() {
    const char c = peek();
    switch (c) {
      case '(':
        if (prev_ < 0 || !after_atom_) throw SyntaxError("branch without preceding atom", pos_);
        if (pending_) throw SyntaxError("bond symbol before branch", pos_);
        branches_.emplace_back(prev_, static_cast<int>(m_.atom_count()));
        after_atom_ = false;
        ++pos_;
        return;
      case ')':
        if (branches_.empty()) throw SyntaxError("unbalanced ')'", pos_);
        if (pending_) throw SyntaxError("dangling bond symbol", pending_pos_);
        if (static_cast<int>(m_.atom_count()) == branches_.back().second)
          throw SyntaxError("empty branch", pos_);
        prev_ = branches_.back().first;
        branches_.pop_back();
        after_atom_ = true;
        ++pos_;
        return;
      case '-':
      case '=':
      case '#':
      case ':':
        bond_symbol(c);
        return;
      case '/':
      case '\\':
        throw UnsupportedFeature("directional bonds (stereo) are not supported", pos_);
      case '$':
        throw UnsupportedFeature("quadruple bonds are not supported", pos_);
      case '.':
        throw MultiComponentError("multi-component SMILES are not accepted", pos_);
      case '%':
        ring_closure();
        return;
      case '[':
        bracket_atom();
        return;
      default:
        break;
    }
    if (is_digit(c)) {
      ring_closure();
      return;
    }
    organic_atom();
  }

  void bond_symbol(char c) {
    if (prev_ < 0) throw SyntaxError("bond symbol without preceding atom", pos_);
    if (pending_) throw SyntaxError("consecutive bond symbols", pos_);
    switch (c) {
      case '-': pending_ = BondOrder::Single; break;
      case '=': pending_ = BondOrder::Double; break;
      case '#': pending_ = BondOrder::Triple; break;
      default: pending_ = BondOrder::Aromatic; break;
    }
    pending_pos_ = pos_;
    ++pos_;
  }

  BondOrder default_order(int a, int b) const {
    return (m_.atom(a).aromatic && m_.atom(b).aromatic) ? BondOrder::Aromatic : BondOrder::Single;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0 || !after_atom_) throw SyntaxError("ring-closure digit without preceding atom", pos_);
    int number = 0;
    if (peek() == '%') {
      if (!is_digit(peek(1)) || !is_digit(peek(2))) throw SyntaxError("'%' must be followed by two digits", pos_);
      number = (peek(1) - '0') * 10 + (peek(2) - '0');
      pos_ += 3;
    } else {
      number = peek() - '0';
      ++pos_;
    }
    auto it = rings_.find(number);
    if (it == rings_.end()) {
      rings_.emplace(number, OpenRing{prev_, pending_, start});
      pending_.reset();
      return;
    }
    const OpenRing open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) throw SyntaxError("ring closure to the same atom", start);
    if (m_.bond_between(open.atom, prev_) >= 0) throw SyntaxError("ring closure duplicates a bond", start);
    if (open.order && pending_ && *open.order != *pending_)
      throw SyntaxError("conflicting ring-closure bond symbols", start);
    const BondOrder order = pending_ ? *pending_ : open.order ? *open.order : default_order(open.atom, prev_);
    pending_.reset();
    m_.add_bond(open.atom, prev_, order);
  }

  void attach(const Atom& atom) {
    const int idx = m_.add_atom(atom);
    if (prev_ >= 0) {
      const BondOrder order = pending_ ? *pending_ : default_order(prev_, idx);
      m_.add_bond(prev_, idx, order);
    } else if (pending_) {
      throw SyntaxError("bond symbol before first atom", pending_pos_);
    }
    pending_.reset();
    prev_ = idx;
    after_atom_ = true;
  }

  void organic_atom() {
    const std::size_t start = pos_;
    const char c = peek();
    Atom atom;
    if (c == '*') {
      if (!opt_.allow_wildcards) throw UnsupportedFeature("wildcard atom outside fragment context", start);
      atom.element = Element::Wildcard;
      ++pos_;
      attach(atom);
      return;
    }
    if (c == 'C' && peek(1) == 'l') {
      atom.element = Element::Cl;
      pos_ += 2;
    } else if (c == 'B' && peek(1) == 'r') {
      atom.element = Element::Br;
      pos_ += 2;
    } else {
      switch (c) {
        case 'B': atom.element = Element::B; break;
        case 'C': atom.element = Element::C; break;
        case 'N': atom.element = Element::N; break;
        case 'O': atom.element = Element::O; break;
        case 'P': atom.element = Element::P; break;
        case 'S': atom.element = Element::S; break;
        case 'F': atom.element = Element::F; break;
        case 'I': atom.element = Element::I; break;
        case 'b': atom.element = Element::B; atom.aromatic = true; break;
        case 'c': atom.element = Element::C; atom.aromatic = true; break;
        case 'n': atom.element = Element::N; atom.aromatic = true; break;
        case 'o': atom.element = Element::O; atom.aromatic = true; break;
        case 'p': atom.element = Element::P; atom.aromatic = true; break;
        case 's': atom.element = Element::S; atom.aromatic = true; break;
        case '@':
          throw UnsupportedFeature("chirality markers are not supported", start);
        default:
          throw SyntaxError(std::string("unexpected character '") + c + "'", start);
      }
      ++pos_;
    }
    attach(atom);
  }

  int read_number() {
    int value = 0;
    int digits = 0;
    while (is_digit(peek())) {
      if (++digits > 3) throw SyntaxError("number too long", pos_);
      value = value * 10 + (peek() - '0');
      ++pos_;
    }
    return digits == 0 ? -1 : value;
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    if (is_digit(peek())) throw UnsupportedFeature("isotope labels are not supported", pos_);
    Atom atom;
    atom.bracket = true;
    const char c = peek();
    if (c == '*') {
      if (!opt_.allow_wildcards) throw UnsupportedFeature("wildcard atom outside fragment context", pos_);
      atom.element = Element::Wildcard;
      ++pos_;
    } else if (std::islower(static_cast<unsigned char>(c))) {
      if (std::islower(static_cast<unsigned char>(peek(1))))
        throw UnsupportedFeature("aromatic element not supported", pos_);
      const char upper = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      auto e = element_from_symbol(std::string_view(&upper, 1));
      if (!e || (*e != Element::B && *e != Element::C && *e != Element::N && *e != Element::O &&
                 *e != Element::P && *e != Element::S))
        throw SyntaxError(std::string("invalid aromatic symbol '") + c + "'", pos_);
      atom.element = *e;
      atom.aromatic = true;
      ++pos_;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, c);
      if (std::islower(static_cast<unsigned char>(peek(1)))) {
        std::string two = sym + peek(1);
        if (element_from_symbol(two)) {
          sym = two;
        } else {
          throw UnsupportedFeature("element " + two + " is not supported", pos_);
        }
      }
      auto e = element_from_symbol(sym);
      if (!e) throw UnsupportedFeature("element " + sym + " is not supported", pos_);
      if (*e == Element::H) throw UnsupportedFeature("explicit hydrogen atoms are not supported", pos_);
      atom.element = *e;
      pos_ += sym.size();
    } else {
      throw SyntaxError("missing element symbol in bracket atom", pos_);
    }
    if (peek() == '@') throw UnsupportedFeature("chirality markers are not supported", pos_);
    if (peek() == 'H') {
      ++pos_;
      const int n = read_number();
      atom.implicit_h = n < 0 ? 1 : n;
    }
    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      ++pos_;
      int magnitude = 1;
      const int n = read_number();
      if (n >= 0) {
        magnitude = n;
      } else {
        while (peek() == sign) {
          ++magnitude;
          ++pos_;
        }
      }
      if (magnitude > 8) throw SyntaxError("charge out of range", pos_);
      atom.charge = sign == '+' ? magnitude : -magnitude;
    }
    if (peek() == ':') {
      ++pos_;
      const int n = read_number();
      if (n < 0) throw SyntaxError("atom class without number", pos_);
      if (!atom.is_wildcard()) throw UnsupportedFeature("atom classes are only supported on wildcard sites", pos_);
      atom.site = n;
    }
    if (peek() != ']') throw SyntaxError("malformed bracket atom", start);
    ++pos_;
    if (atom.is_wildcard() && (atom.charge != 0 || atom.implicit_h != 0))
      throw SyntaxError("wildcard atoms carry no charge or hydrogens", start);
    attach(atom);
  }

  void finish() {
    const std::size_t n = m_.atom_count();
    for (const auto& b : m_.bonds()) {
      if (b.order != BondOrder::Aromatic) continue;
      if (!m_.atom(b.begin).aromatic || !m_.atom(b.end).aromatic)
        throw SyntaxError("aromatic bond between non-aromatic atoms");
    }

    bool has_aromatic = false;
    std::vector<char> demand(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const Atom& a = m_.atom(static_cast<int>(i));
      if (!a.aromatic) continue;
      has_aromatic = true;
      const int used = m_.bond_valence_sum(static_cast<int>(i));
      if (!a.bracket) {
        const auto v = fill_valence(a.element, 0, used);
        demand[i] = v && *v - used >= 1;
      } else {
        const auto allowed = allowed_valences(a.element, a.charge);
        const int total = used + a.implicit_h;
        demand[i] = std::find(allowed.begin(), allowed.end(), total) == allowed.end() &&
                    std::find(allowed.begin(), allowed.end(), total + 1) != allowed.end();
      }
    }
    bool kekule = true;
    if (has_aromatic && !kekulize(m_, demand)) {
      if (!opt_.query) throw ValenceError("aromatic system cannot be kekulized");
      kekule = false;
    }

    for (std::size_t i = 0; i < n; ++i) {
      Atom& a = m_.atom(static_cast<int>(i));
      if (a.is_wildcard()) continue;
      const int used = m_.bond_valence_sum(static_cast<int>(i)) + (!kekule && a.aromatic ? 1 : 0);
      if (!a.bracket) {
        const auto v = fill_valence(a.element, 0, used);
        if (!v) {
          if (!opt_.query)
            throw ValenceError(std::string(element_symbol(a.element)) + " atom " + std::to_string(i) +
                               " exceeds allowed valence");
          a.implicit_h = 0;
        } else {
          a.implicit_h = *v - used;
        }
        continue;
      }
      if (opt_.query) continue;
      const auto allowed = allowed_valences(a.element, a.charge);
      if (allowed.empty())
        throw ValenceError("unsupported charge " + std::to_string(a.charge) + " on " +
                           std::string(element_symbol(a.element)));
      if (used + a.implicit_h > allowed.back())
        throw ValenceError(std::string(element_symbol(a.element)) + " atom " + std::to_string(i) +
                           " exceeds allowed valence");
    }
    m_.refresh_rings();
    if (kekule) perceive_aromaticity(m_);
  }
};

}  // namespace

Molecule parse_smiles(std::string_view text, const ParseOptions& options) {
  return Parser(text, options).run();
}

Molecule parse_pattern(std::string_view text) {
  return parse_smiles(text, ParseOptions{.allow_wildcards = true, .query = true});
}

std::vector<SmilesRecord> read_smiles_lines(std::istream& in) {
  std::vector<SmilesRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first.front() == '#') continue;
    out.push_back({number, first});
  }
  return out;
}

std::vector<SmilesRecord> read_smiles_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open SMILES file: " + path);
  return read_smiles_lines(in);
}

std::vector<Molecule> load_molecules(const std::string& path) {
  std::vector<Molecule> out;
  for (const auto& rec : read_smiles_file(path)) {
    try {
      out.push_back(parse_smiles(rec.text));
    } catch (const SmilesError& e) {
      throw std::runtime_error(path + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace fragmenta::chem
