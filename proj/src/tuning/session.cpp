#include "fragmenta/tuning/session.hpp"

#include <fstream>

#include "fragmenta/chem/errors.hpp"
#include "fragmenta/util/digest.hpp"

namespace fragmenta::tuning {

using nlohmann::json;

std::string to_string(Mode m) {
  switch (m) {
    case Mode::HumanHuman: return "human-human";
    case Mode::HumanAgent: return "human-agent";
    case Mode::AgentAgent: return "agent-agent";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "human-human") return Mode::HumanHuman;
  if (s == "human-agent") return Mode::HumanAgent;
  if (s == "agent-agent") return Mode::AgentAgent;
  throw std::invalid_argument("unknown mode '" + s + "' (expected human-human, human-agent or agent-agent)");
}

json to_json(const Event& e) {
  return {{"seq", e.seq}, {"round", e.round}, {"stage", e.stage}, {"input_digest", e.input_digest},
          {"decision", e.decision}};
}

const Event& EventLog::log(int round, std::string stage, const std::string& input, json decision) {
  Event e{events_.size() + 1, round, std::move(stage), hex_digest(input), std::move(decision)};
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app);
    if (out) out << to_json(e).dump() << '\n';
  }
  events_.push_back(std::move(e));
  return events_.back();
}

json to_json(const TuningOutcome& o) {
  json applied = json::array(), pending = json::array();
  for (const auto& r : o.applied) applied.push_back(to_json(r));
  for (const auto& r : o.pending) pending.push_back(to_json(r));
  json j{{"sufficient", o.eval.sufficient},
         {"reasons", to_json(o.eval)["reasons"]},
         {"applied", std::move(applied)},
         {"pending", std::move(pending)},
         {"version_before", o.version_before},
         {"version_after", o.version_after},
         {"resolved", o.resolved},
         {"questions", o.clarification ? json(o.clarification->questions) : json::array()}};
  return j;
}

TuningSession::TuningSession(obj::ObjectiveSpec initial, SessionOptions options,
                             std::shared_ptr<const Reasoner> reasoner, EventLog* log)
    : spec_(initial), kb_(std::move(initial)), options_(options), reasoner_(std::move(reasoner)), log_(log) {}

TuningSession::TuningSession(KnowledgeBase kb, SessionOptions options, std::shared_ptr<const Reasoner> reasoner,
                             EventLog* log)
    : spec_(kb.replay(std::nullopt, options.apply)),
      kb_(std::move(kb)),
      options_(options),
      reasoner_(std::move(reasoner)),
      log_(log) {}

void TuningSession::event(const std::string& stage, const std::string& input, json decision) {
  if (log_) log_->log(round_, stage, input, std::move(decision));
}

TuningOutcome TuningSession::submit(const FeedbackRecord& f) {
  round_ = f.round;
  const std::string input = to_json(f).dump();
  TuningOutcome out;
  out.version_before = spec_.version;
  out.version_after = spec_.version;

  if (options_.mode == Mode::HumanHuman) {
    // Verbatim: structured items go straight into the objective.
    std::vector<DistilledRule> rules;
    for (const auto& item : f.items)
      if (is_structured(item)) rules.push_back({{f.id}, item, 1.0, f.round});
    for (const auto& r : rules) kb_.add_rule(r);
    spec_ = apply_to_objective(rules, spec_, &kb_, f.id, options_.apply);
    out.applied = rules;
    out.version_after = spec_.version;
    out.resolved = true;
    event("apply", input, {{"mode", to_string(options_.mode)}, {"version", spec_.version}});
    return out;
  }

  out.eval = eval_feedback(f, spec_, kb_, reasoner_ != nullptr, options_.eval);
  event("eval", input, to_json(out.eval));
  std::vector<DistilledRule> rules;
  if (out.eval.sufficient) {
    try {
      rules = extract_knowledge(f, exchanges_, kb_, spec_, reasoner_.get());
    } catch (const ReasonerUnavailable& e) {
      out.eval.sufficient = false;
      out.eval.reasons.push_back({-1, ReasonCode::ReasonerFailed, e.what()});
    } catch (const SchemaViolation& e) {
      out.eval.sufficient = false;
      out.eval.reasons.push_back({-1, ReasonCode::ReasonerFailed, std::string("reasoner output rejected: ") + e.what()});
    }
    // Free text the reasoner could not map to anything.
    if (out.eval.sufficient && rules.empty()) {
      for (int i = 0; i < static_cast<int>(f.items.size()); ++i)
        if (std::holds_alternative<FreeText>(f.items[static_cast<std::size_t>(i)]) && reasoner_)
          out.eval.reasons.push_back({i, ReasonCode::Uninterpretable, "reasoner found no actionable change"});
      out.eval.sufficient = out.eval.reasons.empty();
    }
  }
  if (!out.eval.sufficient) {
    auto ex = make_queries(f, out.eval.reasons, exchanges_);
    event("query", input, to_json(ex));
    exchanges_.push_back(ex);
    out.clarification = std::move(ex);
    return out;
  }
  json extracted = json::array();
  for (const auto& r : rules) extracted.push_back(to_json(r));
  event("extract", input, {{"rules", extracted}, {"kb_digest", kb_.digest()}});

  std::vector<DistilledRule> now;
  for (auto& r : rules) {
    if (options_.mode == Mode::HumanAgent && r.confidence < options_.approval_threshold) {
      pending_.push_back(r);
      out.pending.push_back(r);
    } else {
      now.push_back(r);
    }
  }
  try {
    spec_ = apply_to_objective(now, spec_, &kb_, f.id, options_.apply);
  } catch (const obj::UnknownTerm& e) {
    out.eval.sufficient = false;
    out.eval.reasons.push_back({-1, ReasonCode::UnknownTerm, e.what()});
    auto ex = make_queries(f, out.eval.reasons, exchanges_);
    exchanges_.push_back(ex);
    out.clarification = std::move(ex);
    return out;
  }
  out.applied = std::move(now);
  out.version_after = spec_.version;
  out.resolved = true;
  for (auto& ex : exchanges_)
    if (ex.feedback_id == f.id) ex.resolved = true;
  event("apply", input, {{"version", spec_.version}, {"applied", out.applied.size()}, {"pending", out.pending.size()}});
  return out;
}

TuningOutcome TuningSession::approve_pending(const std::string& source) {
  TuningOutcome out;
  out.version_before = spec_.version;
  spec_ = apply_to_objective(pending_, spec_, &kb_, source, options_.apply);
  out.applied = std::move(pending_);
  pending_.clear();
  out.version_after = spec_.version;
  out.resolved = true;
  event("approve", source, {{"version", spec_.version}, {"applied", out.applied.size()}});
  return out;
}

void TuningSession::reject_pending() {
  event("reject", "pending", {{"rejected", pending_.size()}});
  pending_.clear();
}

const obj::ObjectiveSpec& TuningSession::operator_edit(obj::ObjectiveSpec edited) {
  spec_ = replace_objective(spec_, std::move(edited), kb_);
  event("operator_edit", obj::to_json(spec_).dump(), {{"version", spec_.version}});
  return spec_;
}

}  // namespace fragmenta::tuning
