#include "fragmenta/tuning/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fragmenta/chem/errors.hpp"
#include "fragmenta/chem/smiles.hpp"

namespace fragmenta::tuning {

using nlohmann::json;

std::string to_string(ReasonCode c) {
  switch (c) {
    case ReasonCode::Unstructured: return "unstructured";
    case ReasonCode::NonNovel: return "non_novel";
    case ReasonCode::BadPattern: return "bad_pattern";
    case ReasonCode::UnknownTerm: return "unknown_term";
    case ReasonCode::Uninterpretable: return "uninterpretable";
    case ReasonCode::ReasonerFailed: return "reasoner_failed";
  }
  return "?";
}

namespace {

std::string item_label(int i) { return "item " + std::to_string(i + 1); }

// Empty when the pattern parses, else the parser's message.
std::string pattern_error(const std::string& pattern) {
  try {
    (void)chem::parse_pattern(pattern);
    return {};
  } catch (const chem::SmilesError& e) {
    return e.what();
  }
}

void check_pattern(const std::string& pattern, double lambda, const std::string& prefix, int i,
                   const obj::ObjectiveSpec& spec, const EvalOptions& opt, std::vector<Reason>& out) {
  if (auto err = pattern_error(pattern); !err.empty()) {
    out.push_back({i, ReasonCode::BadPattern, item_label(i) + ": pattern '" + pattern + "' does not parse: " + err});
    return;
  }
  if (spec.find(prefix + pattern) && std::abs(lambda) < opt.noise_floor)
    out.push_back({i, ReasonCode::NonNovel, item_label(i) + ": '" + pattern + "' is already in the objective"});
}

}  // namespace

EvalResult eval_feedback(const FeedbackRecord& f, const obj::ObjectiveSpec& spec, const KnowledgeBase&,
                         bool has_reasoner, const EvalOptions& opt) {
  EvalResult r;
  const bool all_text = !f.items.empty() && std::all_of(f.items.begin(), f.items.end(), [](const FeedbackItem& i) {
    return std::holds_alternative<FreeText>(i);
  });
  if (all_text && !has_reasoner)
    r.reasons.push_back({-1, ReasonCode::Unstructured, "unstructured without reasoner"});

  for (int i = 0; i < static_cast<int>(f.items.size()); ++i) {
    const auto& item = f.items[static_cast<std::size_t>(i)];
    if (const auto* a = std::get_if<AdjustWeight>(&item)) {
      const auto* t = spec.find(a->term);
      if (!t && !creatable_term(a->term)) {
        r.reasons.push_back({i, ReasonCode::UnknownTerm, item_label(i) + ": no objective term named '" + a->term + "'"});
      } else if (t && std::abs(a->delta) < opt.noise_floor) {
        r.reasons.push_back({i, ReasonCode::NonNovel, item_label(i) + ": change to '" + a->term + "' is below the noise floor"});
      }
    } else if (const auto* s = std::get_if<SetThreshold>(&item)) {
      const auto* t = spec.find(obj::penalty_term_name(s->property));
      if (t && std::abs(t->threshold - s->value) < opt.noise_floor)
        r.reasons.push_back({i, ReasonCode::NonNovel,
                             item_label(i) + ": threshold for " + obj::to_string(s->property) + " is already " +
                                 std::to_string(t->threshold)});
    } else if (const auto* p = std::get_if<PenalizeSubstructure>(&item)) {
      check_pattern(p->pattern, p->lambda, "penalize:", i, spec, opt, r.reasons);
    } else if (const auto* b = std::get_if<RewardSubstructure>(&item)) {
      check_pattern(b->pattern, b->lambda, "reward:", i, spec, opt, r.reasons);
    }
  }
  r.sufficient = r.reasons.empty();
  return r;
}

ClarificationExchange make_queries(const FeedbackRecord& f, std::span<const Reason> reasons,
                                   std::span<const ClarificationExchange> history) {
  std::set<std::string> asked;
  for (const auto& h : history) asked.insert(h.questions.begin(), h.questions.end());
  ClarificationExchange ex;
  ex.feedback_id = f.id;
  for (const auto& reason : reasons) {
    std::ostringstream q;
    const FeedbackItem* item = reason.item >= 0 && static_cast<std::size_t>(reason.item) < f.items.size()
                                   ? &f.items[static_cast<std::size_t>(reason.item)]
                                   : nullptr;
    const std::string what = item ? describe(*item) : "this feedback";
    switch (reason.code) {
      case ReasonCode::Unstructured:
        q << "No reasoner is configured to read free text. Which objective term should change, and by how much?";
        break;
      case ReasonCode::NonNovel:
        q << what << " matches the current objective. Should the change be larger, or is no change intended?";
        break;
      case ReasonCode::BadPattern: {
        std::string pattern;
        if (item) {
          if (const auto* p = std::get_if<PenalizeSubstructure>(item)) pattern = p->pattern;
          if (const auto* b = std::get_if<RewardSubstructure>(item)) pattern = b->pattern;
        }
        q << "The pattern '" << pattern << "' could not be read. Can you restate it as SMILES?";
        break;
      }
      case ReasonCode::UnknownTerm:
        q << what << " names a term the objective does not have. Which existing term did you mean?";
        break;
      case ReasonCode::Uninterpretable:
        q << what << " could not be mapped to a change. Which property or substructure is it about?";
        break;
      case ReasonCode::ReasonerFailed:
        q << "The reasoner could not be reached for " << what << ". Can you restate it as a structured item?";
        break;
    }
    const std::string text = q.str();
    if (asked.insert(text).second) ex.questions.push_back(text);
  }
  return ex;
}

std::vector<DistilledRule> extract_knowledge(const FeedbackRecord& f, std::span<const ClarificationExchange> exchanges,
                                             KnowledgeBase& kb, const obj::ObjectiveSpec& spec,
                                             const Reasoner* reasoner) {
  std::vector<FeedbackItem> items = f.items;
  for (const auto& ex : exchanges)
    if (ex.feedback_id == f.id) items.insert(items.end(), ex.answers.begin(), ex.answers.end());

  std::vector<DistilledRule> staged;
  for (const auto& item : items) {
    if (std::holds_alternative<NoOp>(item)) continue;
    if (const auto* text = std::get_if<FreeText>(&item)) {
      if (!reasoner) continue;
      const auto t = reasoner->translate(text->text, spec, kb);
      for (const auto& translated : t.items) staged.push_back({{f.id}, translated, t.confidence, f.round});
      continue;
    }
    staged.push_back({{f.id}, item, 1.0, f.round});
  }
  std::vector<DistilledRule> out;
  for (const auto& r : staged) {
    kb.add_rule(r);
    out.push_back(r);
  }
  return out;
}

json to_json(const Reason& r) {
  return {{"item", r.item}, {"code", to_string(r.code)}, {"message", r.message}};
}

json to_json(const EvalResult& r) {
  json reasons = json::array();
  for (const auto& x : r.reasons) reasons.push_back(to_json(x));
  return {{"sufficient", r.sufficient}, {"reasons", std::move(reasons)}};
}

json to_json(const ClarificationExchange& c) {
  json answers = json::array();
  for (const auto& a : c.answers) answers.push_back(to_json(a));
  return {{"feedback_id", c.feedback_id}, {"questions", c.questions}, {"answers", std::move(answers)},
          {"resolved", c.resolved}};
}

}  // namespace fragmenta::tuning
