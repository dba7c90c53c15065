#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fragmenta/obj/objective.hpp"
#include "fragmenta/tuning/feedback.hpp"
#include "json.hpp"

namespace fragmenta::tuning {

struct DistilledRule {
  std::vector<std::string> origins;  // feedback ids
  FeedbackItem item;
  double confidence = 1.0;
  int round = 0;
};

/// One objective change. `operations` replays it; `diff` is for readers.
struct HistoryEntry {
  int version = 0;
  std::string source;  // feedback id, or "operator"
  std::vector<DistilledRule> operations;
  std::optional<obj::ObjectiveSpec> replacement;  // operator edits replace the spec wholesale
  nlohmann::json diff = nlohmann::json::array();
  std::uint64_t timestamp = 0;  // logical clock, strictly increasing
};

struct ApplyOptions {
  double lambda_max = 2.0;
  double default_lambda = 0.5;  // for terms created by SetThreshold / AdjustWeight
};

/// Append-only store of distilled rules and objective history. Replaying the
/// history over `base` reproduces every later objective version.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(obj::ObjectiveSpec base) : base_(std::move(base)) {}

  const obj::ObjectiveSpec& base() const noexcept { return base_; }
  const std::vector<DistilledRule>& rules() const noexcept { return rules_; }
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }
  bool empty() const noexcept { return rules_.empty(); }

  /// Adds the rule, or merges it into an existing one with the same item
  /// (max confidence, union of origins). Returns the stored rule.
  const DistilledRule& add_rule(const DistilledRule& rule);
  void record(HistoryEntry entry);
  std::uint64_t tick() noexcept { return ++clock_; }

  /// Spec at `version` (default: latest) rebuilt from base and history.
  obj::ObjectiveSpec replay(std::optional<int> version = std::nullopt, const ApplyOptions& options = {}) const;

  nlohmann::json to_json() const;
  static KnowledgeBase from_json(const nlohmann::json& j);
  void persist(const std::string& path) const;
  static KnowledgeBase restore(const std::string& path);
  std::string digest() const;

 private:
  obj::ObjectiveSpec base_;
  std::vector<DistilledRule> rules_;
  std::vector<HistoryEntry> history_;
  std::uint64_t clock_ = 0;
};

/// New spec with every rule applied and version + 1. No rules (or only NoOp
/// and FreeText) returns the spec unchanged. Throws obj::UnknownTerm when an
/// AdjustWeight names a term that is absent and cannot be created. When `kb`
/// is given the change is recorded in its history.
obj::ObjectiveSpec apply_to_objective(std::span<const DistilledRule> rules, const obj::ObjectiveSpec& spec,
                                      KnowledgeBase* kb = nullptr, const std::string& source = {},
                                      const ApplyOptions& options = {});

/// Operator edit applied verbatim (human-human mode); recorded as a replacement.
obj::ObjectiveSpec replace_objective(const obj::ObjectiveSpec& current, obj::ObjectiveSpec edited, KnowledgeBase& kb,
                                     const std::string& source = "operator");

/// Whether AdjustWeight can create `term` when it is missing.
bool creatable_term(const std::string& term);

nlohmann::json to_json(const DistilledRule& r);
DistilledRule rule_from_json(const nlohmann::json& j);

}  // namespace fragmenta::tuning
