#pragma once

#include <span>
#include <string>
#include <vector>

#include "fragmenta/obj/objective.hpp"
#include "fragmenta/tuning/feedback.hpp"
#include "fragmenta/tuning/knowledge.hpp"
#include "fragmenta/tuning/reasoner.hpp"

namespace fragmenta::tuning {

enum class ReasonCode { Unstructured, NonNovel, BadPattern, UnknownTerm, Uninterpretable, ReasonerFailed };

std::string to_string(ReasonCode c);

struct Reason {
  int item = -1;  // index into the record's items; -1 for the whole record
  ReasonCode code = ReasonCode::Unstructured;
  std::string message;
  bool operator==(const Reason&) const = default;
};

struct EvalResult {
  bool sufficient = true;
  std::vector<Reason> reasons;
};

struct EvalOptions {
  double noise_floor = 1e-3;  // smaller changes to an existing term are not novel
};

/// Deterministic sufficiency rules. Insufficient when (a) every item is free
/// text and there is no reasoner, (b) an item restates the current objective
/// within the noise floor, (c) a pattern fails to parse, or (d) an
/// AdjustWeight names a term that neither exists nor can be created.
EvalResult eval_feedback(const FeedbackRecord& f, const obj::ObjectiveSpec& spec, const KnowledgeBase& kb,
                         bool has_reasoner, const EvalOptions& options = {});

struct ClarificationExchange {
  std::string feedback_id;
  std::vector<std::string> questions;
  std::vector<FeedbackItem> answers;
  bool resolved = false;
};

/// One templated question per reason. Questions already asked anywhere in
/// history are suppressed.
ClarificationExchange make_queries(const FeedbackRecord& f, std::span<const Reason> reasons,
                                   std::span<const ClarificationExchange> history);

/// Structured items (and structured answers) become rules with confidence 1;
/// free text goes through the reasoner and carries its confidence. Rules are
/// merged into kb and returned in item order. Throws ReasonerUnavailable /
/// SchemaViolation from the reasoner.
std::vector<DistilledRule> extract_knowledge(const FeedbackRecord& f, std::span<const ClarificationExchange> exchanges,
                                             KnowledgeBase& kb, const obj::ObjectiveSpec& spec,
                                             const Reasoner* reasoner);

nlohmann::json to_json(const Reason& r);
nlohmann::json to_json(const EvalResult& r);
nlohmann::json to_json(const ClarificationExchange& c);

}  // namespace fragmenta::tuning
