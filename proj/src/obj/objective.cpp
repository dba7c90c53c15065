#include "fragmenta/obj/objective.hpp"

#include <algorithm>
#include <cmath>

#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/chem/substructure.hpp"
#include "fragmenta/parallel/kernels.hpp"

namespace fragmenta::obj {

using nlohmann::json;

std::string to_string(TermKind k) {
  switch (k) {
    case TermKind::PropertyPenalty: return "property_penalty";
    case TermKind::SubstructurePenalty: return "substructure_penalty";
    case TermKind::SubstructureBonus: return "substructure_bonus";
    case TermKind::DiversityGroup: return "diversity_group";
    case TermKind::SynthesizabilityProxy: return "synthesizability_proxy";
  }
  return "?";
}

std::string to_string(Property p) {
  switch (p) {
    case Property::MolWeight: return "mol_weight";
    case Property::LogP: return "logp";
    case Property::Hbd: return "hbd";
    case Property::Hba: return "hba";
    case Property::RotatableBonds: return "rotatable_bonds";
    case Property::Qed: return "qed";
    case Property::Sa: return "sa";
  }
  return "?";
}

std::string to_string(Direction d) { return d == Direction::Above ? "above" : "below"; }
std::string to_string(PenaltyMode m) { return m == PenaltyMode::Hard ? "hard" : "hinge"; }

TermKind term_kind_from_string(const std::string& s) {
  for (auto k : {TermKind::PropertyPenalty, TermKind::SubstructurePenalty, TermKind::SubstructureBonus,
                 TermKind::DiversityGroup, TermKind::SynthesizabilityProxy})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown term kind '" + s + "'");
}

std::optional<Property> property_from_string(const std::string& raw) {
  std::string s;
  for (char c : raw) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "mol_weight" || s == "mw" || s == "molecular_weight" || s == "weight") return Property::MolWeight;
  if (s == "logp" || s == "clogp") return Property::LogP;
  if (s == "hbd" || s == "donors") return Property::Hbd;
  if (s == "hba" || s == "acceptors") return Property::Hba;
  if (s == "rotatable_bonds" || s == "rotb") return Property::RotatableBonds;
  if (s == "qed") return Property::Qed;
  if (s == "sa") return Property::Sa;
  return std::nullopt;
}

Direction direction_from_string(const std::string& s) {
  if (s == "above") return Direction::Above;
  if (s == "below") return Direction::Below;
  throw std::invalid_argument("unknown direction '" + s + "'");
}

PenaltyMode penalty_mode_from_string(const std::string& s) {
  if (s == "hard") return PenaltyMode::Hard;
  if (s == "hinge") return PenaltyMode::Hinge;
  throw std::invalid_argument("unknown penalty mode '" + s + "'");
}

std::string penalty_term_name(Property p) {
  switch (p) {
    case Property::MolWeight: return "mw_penalty";
    case Property::LogP: return "logp_penalty";
    default: return to_string(p) + "_penalty";
  }
}

const ObjectiveTerm* ObjectiveSpec::find(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return &t;
  return nullptr;
}

ObjectiveTerm* ObjectiveSpec::find(const std::string& name) {
  for (auto& t : terms)
    if (t.name == name) return &t;
  return nullptr;
}

double ObjectiveSpec::total_lambda() const {
  double total = 0.0;
  for (const auto& t : terms) total += t.lambda;
  return total;
}

double ObjectiveSpec::lambda_of(const std::string& name) const {
  const auto* t = find(name);
  return t ? t->lambda : 0.0;
}

ObjectiveSpec internal_objective() {
  ObjectiveSpec spec;
  ObjectiveTerm mw;
  mw.name = penalty_term_name(Property::MolWeight);
  mw.kind = TermKind::PropertyPenalty;
  mw.lambda = 0.5;
  mw.property = Property::MolWeight;
  mw.threshold = 500.0;
  mw.hinge_width = 100.0;
  ObjectiveTerm logp = mw;
  logp.name = penalty_term_name(Property::LogP);
  logp.property = Property::LogP;
  logp.threshold = 5.0;
  logp.hinge_width = 1.0;
  spec.terms = {mw, logp};
  return spec;
}

json to_json(const ObjectiveTerm& t) {
  json j{{"name", t.name}, {"kind", to_string(t.kind)}, {"lambda", t.lambda}, {"provenance", t.provenance}};
  if (t.kind == TermKind::PropertyPenalty) {
    j["property"] = to_string(t.property);
    j["threshold"] = t.threshold;
    j["direction"] = to_string(t.direction);
    j["mode"] = to_string(t.mode);
    j["hinge_width"] = t.hinge_width;
  }
  if (t.kind == TermKind::SubstructurePenalty || t.kind == TermKind::SubstructureBonus) j["pattern"] = t.pattern;
  return j;
}

json to_json(const ObjectiveSpec& s) {
  json terms = json::array();
  for (const auto& t : s.terms) terms.push_back(to_json(t));
  return {{"version", s.version}, {"terms", std::move(terms)}};
}

ObjectiveTerm term_from_json(const json& j) {
  ObjectiveTerm t;
  t.name = j.at("name").get<std::string>();
  t.kind = term_kind_from_string(j.at("kind").get<std::string>());
  t.lambda = j.at("lambda").get<double>();
  if (!(t.lambda >= 0.0) || !std::isfinite(t.lambda)) throw std::invalid_argument("term " + t.name + ": lambda must be >= 0");
  if (t.kind == TermKind::PropertyPenalty) {
    const auto p = property_from_string(j.at("property").get<std::string>());
    if (!p) throw std::invalid_argument("term " + t.name + ": unknown property");
    t.property = *p;
    t.threshold = j.at("threshold").get<double>();
    t.direction = direction_from_string(j.value("direction", std::string("above")));
    t.mode = penalty_mode_from_string(j.value("mode", std::string("hard")));
    t.hinge_width = j.value("hinge_width", 1.0);
  }
  if (t.kind == TermKind::SubstructurePenalty || t.kind == TermKind::SubstructureBonus)
    t.pattern = j.at("pattern").get<std::string>();
  if (j.contains("provenance")) t.provenance = j.at("provenance").get<std::vector<std::string>>();
  return t;
}

ObjectiveSpec spec_from_json(const json& j) {
  ObjectiveSpec s;
  s.version = j.value("version", 0);
  for (const auto& t : j.at("terms")) s.terms.push_back(term_from_json(t));
  return s;
}

double property_value(Property p, const chem::PropertyVector& v, const chem::Molecule& m,
                      const PropertyProvider& provider) {
  switch (p) {
    case Property::MolWeight: return v.mol_weight;
    case Property::LogP: return v.logp;
    case Property::Hbd: return v.hbd;
    case Property::Hba: return v.hba;
    case Property::RotatableBonds: return v.rotatable_bonds;
    case Property::Qed: return provider.qed(m);
    case Property::Sa: return provider.sa(m);
  }
  return 0.0;
}

CompiledObjective::CompiledObjective(ObjectiveSpec spec, const PropertyProvider& provider)
    : spec_(std::move(spec)), provider_(&provider) {
  for (const auto& t : spec_.terms) {
    if (t.kind == TermKind::SubstructurePenalty || t.kind == TermKind::SubstructureBonus) {
      patterns_.emplace_back(chem::parse_pattern(t.pattern));
    } else {
      patterns_.emplace_back(std::nullopt);
    }
    if (t.kind == TermKind::DiversityGroup) diversity_lambda_ += t.lambda;
  }
}

double CompiledObjective::score_individual(const chem::Molecule& m) const {
  std::optional<chem::PropertyVector> props;
  double score = 1.0;
  for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
    const auto& t = spec_.terms[i];
    switch (t.kind) {
      case TermKind::PropertyPenalty: {
        if (!props) props = chem::properties(m);
        const double value = property_value(t.property, *props, m, *provider_);
        const double excess = t.direction == Direction::Above ? value - t.threshold : t.threshold - value;
        if (excess <= 0.0) break;
        const double amount = t.mode == PenaltyMode::Hard ? 1.0 : std::min(1.0, excess / t.hinge_width);
        score -= t.lambda * amount;
        break;
      }
      case TermKind::SubstructurePenalty:
        if (chem::match_substructure(*patterns_[i], m)) score -= t.lambda;
        break;
      case TermKind::SubstructureBonus:
        if (chem::match_substructure(*patterns_[i], m)) score += t.lambda;
        break;
      case TermKind::SynthesizabilityProxy:
        score -= t.lambda * (provider_->sa(m) - 1.0) / 9.0;
        break;
      case TermKind::DiversityGroup:
        break;
    }
  }
  return std::clamp(score, 0.0, 1.0);
}

double score_individual(const chem::Molecule& m, const ObjectiveSpec& spec, const PropertyProvider& provider) {
  return CompiledObjective(spec, provider).score_individual(m);
}

std::vector<double> score_group(std::span<const chem::Fingerprint> fps, const ObjectiveSpec& spec) {
  double lambda = 0.0;
  for (const auto& t : spec.terms)
    if (t.kind == TermKind::DiversityGroup) lambda += t.lambda;
  auto out = parallel::mean_distance_to_rest(fps);
  for (auto& v : out) v *= lambda;
  return out;
}

std::vector<double> score_group(std::span<const chem::Molecule> batch, const ObjectiveSpec& spec, int radius,
                                int width) {
  const auto fps = parallel::fingerprints(batch, radius, width);
  return score_group(fps, spec);
}

}  // namespace fragmenta::obj
