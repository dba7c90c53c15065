#include "fragmenta/tuning/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/util/digest.hpp"

namespace fragmenta::tuning {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

struct DefaultLimit {
  double threshold;
  obj::Direction direction;
  double hinge_width;
};

DefaultLimit default_limit(obj::Property p) {
  switch (p) {
    case obj::Property::MolWeight: return {500.0, obj::Direction::Above, 100.0};
    case obj::Property::LogP: return {5.0, obj::Direction::Above, 1.0};
    case obj::Property::Hbd: return {5.0, obj::Direction::Above, 1.0};
    case obj::Property::Hba: return {10.0, obj::Direction::Above, 1.0};
    case obj::Property::RotatableBonds: return {10.0, obj::Direction::Above, 2.0};
    case obj::Property::Qed: return {0.5, obj::Direction::Below, 0.2};
    case obj::Property::Sa: return {6.0, obj::Direction::Above, 1.0};
  }
  return {0.0, obj::Direction::Above, 1.0};
}

std::optional<obj::Property> penalty_property(const std::string& term) {
  for (auto p : {obj::Property::MolWeight, obj::Property::LogP, obj::Property::Hbd, obj::Property::Hba,
                 obj::Property::RotatableBonds, obj::Property::Qed, obj::Property::Sa})
    if (obj::penalty_term_name(p) == term) return p;
  return std::nullopt;
}

obj::ObjectiveTerm property_term(obj::Property p, double lambda) {
  const auto lim = default_limit(p);
  obj::ObjectiveTerm t;
  t.name = obj::penalty_term_name(p);
  t.kind = obj::TermKind::PropertyPenalty;
  t.lambda = lambda;
  t.property = p;
  t.threshold = lim.threshold;
  t.direction = lim.direction;
  t.hinge_width = lim.hinge_width;
  return t;
}

json change(const std::string& term, const std::string& field, const json& before, const json& after) {
  return {{"term", term}, {"field", field}, {"before", before}, {"after", after}};
}

void add_provenance(obj::ObjectiveTerm& t, const std::vector<std::string>& origins) {
  for (const auto& o : origins)
    if (std::find(t.provenance.begin(), t.provenance.end(), o) == t.provenance.end()) t.provenance.push_back(o);
}

template <class Item>
void apply_substructure(obj::ObjectiveSpec& spec, const Item& item, obj::TermKind kind, const std::string& prefix,
                        const DistilledRule& rule, const ApplyOptions& opt, json& diff) {
  (void)chem::parse_pattern(item.pattern);  // throws on a bad pattern before anything changes
  const std::string name = prefix + item.pattern;
  auto* t = spec.find(name);
  if (!t) {
    obj::ObjectiveTerm term;
    term.name = name;
    term.kind = kind;
    term.pattern = item.pattern;
    term.lambda = std::clamp(item.lambda, 0.0, opt.lambda_max);
    add_provenance(term, rule.origins);
    diff.push_back(change(name, "created", nullptr, term.lambda));
    spec.terms.push_back(std::move(term));
    return;
  }
  // Repeating a substructure rule strengthens the existing term.
  const double before = t->lambda;
  t->lambda = std::clamp(t->lambda + item.lambda, 0.0, opt.lambda_max);
  add_provenance(*t, rule.origins);
  diff.push_back(change(name, "lambda", before, t->lambda));
}

// Applies one rule in place, appending what changed to diff.
void apply_rule(obj::ObjectiveSpec& spec, const DistilledRule& rule, const ApplyOptions& opt, json& diff) {
  const auto& item = rule.item;
  if (const auto* a = std::get_if<AdjustWeight>(&item)) {
    if (!std::isfinite(a->delta)) throw std::invalid_argument("AdjustWeight delta must be finite");
    auto* t = spec.find(a->term);
    if (!t) {
      obj::ObjectiveTerm created;
      if (a->term == obj::kDiversityTerm) {
        created.name = obj::kDiversityTerm;
        created.kind = obj::TermKind::DiversityGroup;
      } else if (a->term == obj::kSynthesizabilityTerm) {
        created.name = obj::kSynthesizabilityTerm;
        created.kind = obj::TermKind::SynthesizabilityProxy;
      } else if (auto p = penalty_property(a->term)) {
        created = property_term(*p, 0.0);
      } else {
        throw obj::UnknownTerm("no objective term named '" + a->term + "'");
      }
      created.lambda = 0.0;
      diff.push_back(change(created.name, "created", nullptr, 0.0));
      spec.terms.push_back(std::move(created));
      t = &spec.terms.back();
    }
    const double before = t->lambda;
    t->lambda = std::clamp(t->lambda + a->delta, 0.0, opt.lambda_max);
    add_provenance(*t, rule.origins);
    diff.push_back(change(t->name, "lambda", before, t->lambda));
  } else if (const auto* s = std::get_if<SetThreshold>(&item)) {
    if (!std::isfinite(s->value)) throw std::invalid_argument("SetThreshold value must be finite");
    const std::string name = obj::penalty_term_name(s->property);
    auto* t = spec.find(name);
    if (!t) {
      spec.terms.push_back(property_term(s->property, opt.default_lambda));
      t = &spec.terms.back();
      diff.push_back(change(name, "created", nullptr, t->lambda));
    }
    const double before = t->threshold;
    t->threshold = s->value;
    add_provenance(*t, rule.origins);
    diff.push_back(change(name, "threshold", before, t->threshold));
  } else if (const auto* p = std::get_if<PenalizeSubstructure>(&item)) {
    apply_substructure(spec, *p, obj::TermKind::SubstructurePenalty, "penalize:", rule, opt, diff);
  } else if (const auto* r = std::get_if<RewardSubstructure>(&item)) {
    apply_substructure(spec, *r, obj::TermKind::SubstructureBonus, "reward:", rule, opt, diff);
  }
}

bool has_effect(const DistilledRule& r) { return is_structured(r.item); }

}  // namespace

bool creatable_term(const std::string& term) {
  return term == obj::kDiversityTerm || term == obj::kSynthesizabilityTerm || penalty_property(term).has_value();
}

const DistilledRule& KnowledgeBase::add_rule(const DistilledRule& rule) {
  for (auto& r : rules_) {
    if (r.item == rule.item) {
      r.confidence = std::max(r.confidence, rule.confidence);
      for (const auto& o : rule.origins)
        if (std::find(r.origins.begin(), r.origins.end(), o) == r.origins.end()) r.origins.push_back(o);
      return r;
    }
  }
  rules_.push_back(rule);
  return rules_.back();
}

void KnowledgeBase::record(HistoryEntry entry) {
  entry.timestamp = tick();
  history_.push_back(std::move(entry));
}

obj::ObjectiveSpec KnowledgeBase::replay(std::optional<int> version, const ApplyOptions& options) const {
  obj::ObjectiveSpec spec = base_;
  for (const auto& h : history_) {
    if (version && h.version > *version) break;
    if (h.replacement) {
      spec = *h.replacement;
    } else {
      spec = apply_to_objective(h.operations, spec, nullptr, {}, options);
    }
    spec.version = h.version;
  }
  return spec;
}

obj::ObjectiveSpec apply_to_objective(std::span<const DistilledRule> rules, const obj::ObjectiveSpec& spec,
                                      KnowledgeBase* kb, const std::string& source, const ApplyOptions& options) {
  if (std::none_of(rules.begin(), rules.end(), has_effect)) return spec;
  obj::ObjectiveSpec next = spec;
  json diff = json::array();
  std::vector<DistilledRule> ops;
  for (const auto& r : rules) {
    if (!has_effect(r)) continue;
    apply_rule(next, r, options, diff);
    ops.push_back(r);
  }
  next.version = spec.version + 1;
  if (kb) {
    HistoryEntry h;
    h.version = next.version;
    h.source = source;
    h.operations = std::move(ops);
    h.diff = std::move(diff);
    kb->record(std::move(h));
  }
  return next;
}

obj::ObjectiveSpec replace_objective(const obj::ObjectiveSpec& current, obj::ObjectiveSpec edited, KnowledgeBase& kb,
                                     const std::string& source) {
  for (const auto& t : edited.terms)
    if (!(t.lambda >= 0.0) || !std::isfinite(t.threshold))
      throw std::invalid_argument("operator edit has an invalid term '" + t.name + "'");
  edited.version = current.version + 1;
  HistoryEntry h;
  h.version = edited.version;
  h.source = source;
  h.replacement = edited;
  h.diff = json::array({change("*", "replaced", obj::to_json(current), obj::to_json(edited))});
  kb.record(std::move(h));
  return edited;
}

json to_json(const DistilledRule& r) {
  return {{"origins", r.origins}, {"item", to_json(r.item)}, {"confidence", r.confidence}, {"round", r.round}};
}

DistilledRule rule_from_json(const json& j) {
  DistilledRule r;
  r.origins = j.at("origins").get<std::vector<std::string>>();
  r.item = item_from_json(j.at("item"));
  r.confidence = j.at("confidence").get<double>();
  r.round = j.at("round").get<int>();
  return r;
}

json KnowledgeBase::to_json() const {
  json rules = json::array();
  for (const auto& r : rules_) rules.push_back(tuning::to_json(r));
  json history = json::array();
  for (const auto& h : history_) {
    json ops = json::array();
    for (const auto& r : h.operations) ops.push_back(tuning::to_json(r));
    json e{{"version", h.version}, {"source", h.source}, {"operations", std::move(ops)}, {"diff", h.diff},
           {"timestamp", h.timestamp}};
    if (h.replacement) e["replacement"] = obj::to_json(*h.replacement);
    history.push_back(std::move(e));
  }
  return {{"version", kFormatVersion}, {"base", obj::to_json(base_)}, {"rules", std::move(rules)},
          {"history", std::move(history)}, {"clock", clock_}};
}

KnowledgeBase KnowledgeBase::from_json(const json& j) {
  if (j.value("version", 0) != kFormatVersion) throw std::runtime_error("knowledge base format version mismatch");
  KnowledgeBase kb(obj::spec_from_json(j.at("base")));
  for (const auto& r : j.at("rules")) kb.rules_.push_back(rule_from_json(r));
  for (const auto& e : j.at("history")) {
    HistoryEntry h;
    h.version = e.at("version").get<int>();
    h.source = e.at("source").get<std::string>();
    for (const auto& r : e.at("operations")) h.operations.push_back(rule_from_json(r));
    if (e.contains("replacement")) h.replacement = obj::spec_from_json(e.at("replacement"));
    h.diff = e.at("diff");
    h.timestamp = e.at("timestamp").get<std::uint64_t>();
    kb.history_.push_back(std::move(h));
  }
  kb.clock_ = j.at("clock").get<std::uint64_t>();
  return kb;
}

void KnowledgeBase::persist(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << to_json().dump(2) << '\n';
  }
  std::rename(tmp.c_str(), path.c_str());
}

KnowledgeBase KnowledgeBase::restore(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return from_json(json::parse(in));
}

std::string KnowledgeBase::digest() const { return hex_digest(to_json().dump()); }

}  // namespace fragmenta::tuning
