#include "fragmenta/chem/element.hpp"

#include <array>

namespace fragmenta::chem {

namespace {

struct ElementInfo {
  Element element;
  std::string_view symbol;
  double weight;
};

constexpr std::array<ElementInfo, 12> kElements{{
    {Element::Wildcard, "*", 0.0},
    {Element::H, "H", 1.008},
    {Element::B, "B", 10.81},
    {Element::C, "C", 12.011},
    {Element::N, "N", 14.007},
    {Element::O, "O", 15.999},
    {Element::F, "F", 18.998},
    {Element::P, "P", 30.974},
    {Element::S, "S", 32.06},
    {Element::Cl, "Cl", 35.45},
    {Element::Br, "Br", 79.904},
    {Element::I, "I", 126.904},
}};

constexpr std::array<int, 1> kV0{0};
constexpr std::array<int, 1> kV1{1};
constexpr std::array<int, 1> kV2{2};
constexpr std::array<int, 1> kV3{3};
constexpr std::array<int, 1> kV4{4};
constexpr std::array<int, 2> kV35{3, 5};
constexpr std::array<int, 3> kV246{2, 4, 6};
constexpr std::array<int, 2> kV35s{3, 5};
constexpr std::array<int, 3> kV135{1, 3, 5};

}  // namespace

std::string_view element_symbol(Element e) {
  for (const auto& info : kElements)
    if (info.element == e) return info.symbol;
  return "?";
}

std::optional<Element> element_from_symbol(std::string_view symbol) {
  for (const auto& info : kElements)
    if (info.symbol == symbol) return info.element;
  return std::nullopt;
}

double atomic_weight(Element e) {
  for (const auto& info : kElements)
    if (info.element == e) return info.weight;
  return 0.0;
}

bool is_organic_subset(Element e) {
  switch (e) {
    case Element::B:
    case Element::C:
    case Element::N:
    case Element::O:
    case Element::P:
    case Element::S:
    case Element::F:
    case Element::Cl:
    case Element::Br:
    case Element::I:
      return true;
    default:
      return false;
  }
}

bool is_halogen(Element e) {
  return e == Element::F || e == Element::Cl || e == Element::Br || e == Element::I;
}

bool is_heteroatom(Element e) {
  return e != Element::C && e != Element::H && e != Element::Wildcard;
}

std::span<const int> allowed_valences(Element e, int charge) {
  switch (e) {
    case Element::B:
      if (charge == 0) return kV3;
      if (charge == -1) return kV4;
      if (charge == 1) return kV2;
      break;
    case Element::C:
      if (charge == 0) return kV4;
      if (charge == 1 || charge == -1) return kV3;
      break;
    case Element::N:
      if (charge == 0) return kV3;
      if (charge == 1) return kV4;
      if (charge == -1) return kV2;
      break;
    case Element::O:
      if (charge == 0) return kV2;
      if (charge == -1) return kV1;
      if (charge == 1) return kV3;
      break;
    case Element::P:
      if (charge == 0) return kV35;
      if (charge == 1) return kV4;
      if (charge == -1) return kV2;
      break;
    case Element::S:
      if (charge == 0) return kV246;
      if (charge == 1) return kV35s;
      if (charge == -1) return kV135;
      break;
    case Element::F:
    case Element::Cl:
    case Element::Br:
    case Element::I:
      if (charge == 0) return kV1;
      if (charge == -1) return kV0;
      if (charge == 1) return kV2;
      break;
    case Element::H:
      if (charge == 0) return kV1;
      break;
    default:
      break;
  }
  return {};
}

std::optional<int> fill_valence(Element e, int charge, int used) {
  for (int v : allowed_valences(e, charge))
    if (v >= used) return v;
  return std::nullopt;
}

}  // namespace fragmenta::chem
