#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fragmenta/obj/objective.hpp"
#include "json.hpp"

namespace fragmenta::tuning {

/// A document that does not conform to the feedback schema.
class SchemaViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AdjustWeight {
  std::string term;
  double delta = 0.0;
  bool operator==(const AdjustWeight&) const = default;
};

struct SetThreshold {
  obj::Property property = obj::Property::MolWeight;
  double value = 0.0;
  bool operator==(const SetThreshold&) const = default;
};

struct PenalizeSubstructure {
  std::string pattern;
  double lambda = 0.0;
  bool operator==(const PenalizeSubstructure&) const = default;
};

struct RewardSubstructure {
  std::string pattern;
  double lambda = 0.0;
  bool operator==(const RewardSubstructure&) const = default;
};

struct FreeText {
  std::string text;
  bool operator==(const FreeText&) const = default;
};

// Emitted by the simulated chemist when the batch is compliant.
struct NoOp {
  bool operator==(const NoOp&) const = default;
};

using FeedbackItem = std::variant<AdjustWeight, SetThreshold, PenalizeSubstructure, RewardSubstructure, FreeText, NoOp>;

enum class Author { Human, Simulated };

struct FeedbackRecord {
  std::string id;
  int round = 0;
  Author author = Author::Human;
  std::vector<FeedbackItem> items;
  bool operator==(const FeedbackRecord&) const = default;
};

std::string kind_of(const FeedbackItem& item);
std::string describe(const FeedbackItem& item);
bool is_structured(const FeedbackItem& item);

std::string to_string(Author a);

nlohmann::json to_json(const FeedbackItem& item);
nlohmann::json to_json(const FeedbackRecord& r);
/// Throw SchemaViolation on missing or mistyped fields, unknown kinds,
/// non-finite numbers, or an empty item list.
FeedbackItem item_from_json(const nlohmann::json& j);
FeedbackRecord record_from_json(const nlohmann::json& j);

}  // namespace fragmenta::tuning
