#include "fragmenta/tuning/chemist.hpp"

#include <algorithm>
#include <map>

#include "fragmenta/chem/canonical.hpp"
#include "fragmenta/chem/properties.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/chem/substructure.hpp"
#include "fragmenta/parallel/kernels.hpp"
#include "fragmenta/util/digest.hpp"

namespace fragmenta::tuning {

using nlohmann::json;

json to_json(const ChemistPersona& p) {
  json limits = json::array();
  for (const auto& l : p.limits)
    limits.push_back({{"property", obj::to_string(l.property)}, {"limit", l.limit}, {"direction", obj::to_string(l.direction)}});
  return {{"limits", std::move(limits)},         {"avoid_patterns", p.avoid_patterns},
          {"review_top", p.review_top},          {"violation_fraction", p.violation_fraction},
          {"weight_step", p.weight_step},        {"pattern_step", p.pattern_step},
          {"diversity_floor", p.diversity_floor}, {"diversity_step", p.diversity_step}};
}

ChemistPersona persona_from_json(const json& j) {
  ChemistPersona p;
  if (j.contains("limits")) {
    p.limits.clear();
    for (const auto& l : j.at("limits")) {
      const auto prop = obj::property_from_string(l.at("property").get<std::string>());
      if (!prop) throw std::invalid_argument("persona: unknown property " + l.at("property").dump());
      p.limits.push_back({*prop, l.at("limit").get<double>(),
                          obj::direction_from_string(l.value("direction", std::string("above")))});
    }
  }
  p.avoid_patterns = j.value("avoid_patterns", p.avoid_patterns);
  p.review_top = j.value("review_top", p.review_top);
  p.violation_fraction = j.value("violation_fraction", p.violation_fraction);
  p.weight_step = j.value("weight_step", p.weight_step);
  p.pattern_step = j.value("pattern_step", p.pattern_step);
  p.diversity_floor = j.value("diversity_floor", p.diversity_floor);
  p.diversity_step = j.value("diversity_step", p.diversity_step);
  return p;
}

namespace {

bool violates(double value, const PropertyLimit& l) {
  return l.direction == obj::Direction::Above ? value > l.limit : value < l.limit;
}

// True when the objective already penalizes everything the limit forbids.
bool threshold_covers(const obj::ObjectiveTerm& t, const PropertyLimit& l) {
  if (t.direction != l.direction) return false;
  return l.direction == obj::Direction::Above ? t.threshold <= l.limit : t.threshold >= l.limit;
}

}  // namespace

FeedbackRecord simulated_chemist(std::span<const chem::Molecule> ranked, const KnowledgeBase& kb,
                                 const obj::ObjectiveSpec& spec, int round, const ChemistPersona& persona) {
  const auto reviewed = ranked.first(std::min(ranked.size(), persona.review_top));

  // Persona limits plus thresholds learned earlier; the strictest per property wins.
  std::map<obj::Property, PropertyLimit> limits;
  auto merge_limit = [&](const PropertyLimit& l) {
    auto [it, fresh] = limits.emplace(l.property, l);
    if (fresh || it->second.direction != l.direction) return;
    const bool stricter = l.direction == obj::Direction::Above ? l.limit < it->second.limit : l.limit > it->second.limit;
    if (stricter) it->second = l;
  };
  for (const auto& l : persona.limits) merge_limit(l);
  std::vector<std::string> patterns = persona.avoid_patterns;
  for (const auto& r : kb.rules()) {
    if (const auto* s = std::get_if<SetThreshold>(&r.item)) {
      const auto* t = spec.find(obj::penalty_term_name(s->property));
      merge_limit({s->property, s->value, t ? t->direction : obj::Direction::Above});
    } else if (const auto* p = std::get_if<PenalizeSubstructure>(&r.item)) {
      if (std::find(patterns.begin(), patterns.end(), p->pattern) == patterns.end()) patterns.push_back(p->pattern);
    }
  }

  FeedbackRecord fb;
  fb.round = round;
  fb.author = Author::Simulated;
  std::string seen;
  for (const auto& m : reviewed) seen += chem::write_canonical(m).str() + '\n';

  if (!reviewed.empty()) {
    const double n = static_cast<double>(reviewed.size());
    std::vector<chem::PropertyVector> props;
    for (const auto& m : reviewed) props.push_back(chem::properties(m));
    for (const auto& [prop, limit] : limits) {
      std::size_t bad = 0;
      for (std::size_t i = 0; i < reviewed.size(); ++i)
        if (violates(obj::property_value(prop, props[i], reviewed[i], obj::default_provider()), limit)) ++bad;
      if (static_cast<double>(bad) < persona.violation_fraction * n) continue;
      const auto* term = spec.find(obj::penalty_term_name(prop));
      if (!term || !threshold_covers(*term, limit)) {
        fb.items.push_back(SetThreshold{prop, limit.limit});
      } else {
        fb.items.push_back(AdjustWeight{term->name, persona.weight_step});
      }
    }
    for (const auto& pattern : patterns) {
      const auto compiled = chem::parse_pattern(pattern);
      std::size_t hits = 0;
      for (const auto& m : reviewed)
        if (chem::match_substructure(compiled, m)) ++hits;
      if (static_cast<double>(hits) >= persona.violation_fraction * n)
        fb.items.push_back(PenalizeSubstructure{pattern, persona.pattern_step});
    }
    if (persona.diversity_floor > 0.0) {
      const auto fps = parallel::fingerprints(reviewed, chem::kDefaultFingerprintRadius, chem::kDefaultFingerprintWidth);
      if (parallel::mean_pairwise_distance(fps) < persona.diversity_floor)
        fb.items.push_back(AdjustWeight{obj::kDiversityTerm, persona.diversity_step});
    }
  }
  if (fb.items.empty()) fb.items.push_back(NoOp{});
  fb.id = "sim-r" + std::to_string(round) + "-" + hex_digest(seen + obj::to_json(spec).dump()).substr(0, 8);
  return fb;
}

}  // namespace fragmenta::tuning
