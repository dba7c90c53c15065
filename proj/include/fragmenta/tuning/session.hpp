#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fragmenta/obj/objective.hpp"
#include "fragmenta/tuning/feedback.hpp"
#include "fragmenta/tuning/knowledge.hpp"
#include "fragmenta/tuning/protocol.hpp"
#include "fragmenta/tuning/reasoner.hpp"
#include "json.hpp"

namespace fragmenta::tuning {

enum class Mode { HumanHuman, HumanAgent, AgentAgent };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/// Structured record of every agent decision.
struct Event {
  std::uint64_t seq = 0;
  int round = 0;
  std::string stage;
  std::string input_digest;
  nlohmann::json decision;
};

class EventLog {
 public:
  EventLog() = default;
  /// Also appends each event as a JSON line to `path`.
  explicit EventLog(std::string path) : path_(std::move(path)) {}

  const Event& log(int round, std::string stage, const std::string& input, nlohmann::json decision);
  const std::vector<Event>& events() const noexcept { return events_; }

 private:
  std::vector<Event> events_;
  std::string path_;
};

nlohmann::json to_json(const Event& e);

struct TuningOutcome {
  EvalResult eval;
  std::optional<ClarificationExchange> clarification;  // set when insufficient
  std::vector<DistilledRule> applied;
  std::vector<DistilledRule> pending;  // awaiting operator approval
  int version_before = 0;
  int version_after = 0;
  bool resolved = false;
};

nlohmann::json to_json(const TuningOutcome& o);

struct SessionOptions {
  Mode mode = Mode::AgentAgent;
  double approval_threshold = 0.5;  // human-agent rules below this wait for approval
  EvalOptions eval;
  ApplyOptions apply;
};

/// The eval -> query -> extract -> apply pipeline for one campaign. Single
/// threaded; the caller serializes access.
class TuningSession {
 public:
  TuningSession(obj::ObjectiveSpec initial, SessionOptions options = {},
                std::shared_ptr<const Reasoner> reasoner = nullptr, EventLog* log = nullptr);
  TuningSession(KnowledgeBase kb, SessionOptions options, std::shared_ptr<const Reasoner> reasoner = nullptr,
                EventLog* log = nullptr);

  const obj::ObjectiveSpec& spec() const noexcept { return spec_; }
  const KnowledgeBase& kb() const noexcept { return kb_; }
  const std::vector<ClarificationExchange>& exchanges() const noexcept { return exchanges_; }
  const std::vector<DistilledRule>& pending() const noexcept { return pending_; }
  const SessionOptions& options() const noexcept { return options_; }

  TuningOutcome submit(const FeedbackRecord& f);
  /// Applies every pending rule; returns the outcome of that application.
  TuningOutcome approve_pending(const std::string& source = "operator-approval");
  void reject_pending();
  /// Human-human mode: the operator's spec replaces the current one verbatim.
  const obj::ObjectiveSpec& operator_edit(obj::ObjectiveSpec edited);

 private:
  obj::ObjectiveSpec spec_;
  KnowledgeBase kb_;
  SessionOptions options_;
  std::shared_ptr<const Reasoner> reasoner_;
  EventLog* log_;
  std::vector<ClarificationExchange> exchanges_;
  std::vector<DistilledRule> pending_;
  int round_ = 0;

  void event(const std::string& stage, const std::string& input, nlohmann::json decision);
};

}  // namespace fragmenta::tuning
