#include "fragmenta/tuning/feedback.hpp"

#include <cmath>
#include <sstream>

namespace fragmenta::tuning {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw SchemaViolation(std::string("missing field '") + name + "'");
  return j.at(name);
}

std::string string_field(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) throw SchemaViolation(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

double number_field(const json& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_number()) throw SchemaViolation(std::string("field '") + name + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaViolation(std::string("field '") + name + "' must be finite");
  return d;
}

}  // namespace

std::string kind_of(const FeedbackItem& item) {
  return std::visit(overloaded{[](const AdjustWeight&) { return std::string("adjust_weight"); },
                               [](const SetThreshold&) { return std::string("set_threshold"); },
                               [](const PenalizeSubstructure&) { return std::string("penalize_substructure"); },
                               [](const RewardSubstructure&) { return std::string("reward_substructure"); },
                               [](const FreeText&) { return std::string("free_text"); },
                               [](const NoOp&) { return std::string("no_op"); }},
                    item);
}

std::string describe(const FeedbackItem& item) {
  std::ostringstream os;
  std::visit(overloaded{[&](const AdjustWeight& a) { os << "AdjustWeight(" << a.term << ", " << a.delta << ")"; },
                        [&](const SetThreshold& s) {
                          os << "SetThreshold(" << obj::to_string(s.property) << ", " << s.value << ")";
                        },
                        [&](const PenalizeSubstructure& p) {
                          os << "PenalizeSubstructure(" << p.pattern << ", " << p.lambda << ")";
                        },
                        [&](const RewardSubstructure& r) {
                          os << "RewardSubstructure(" << r.pattern << ", " << r.lambda << ")";
                        },
                        [&](const FreeText& f) { os << "FreeText(\"" << f.text << "\")"; },
                        [&](const NoOp&) { os << "NoOp"; }},
             item);
  return os.str();
}

bool is_structured(const FeedbackItem& item) {
  return !std::holds_alternative<FreeText>(item) && !std::holds_alternative<NoOp>(item);
}

std::string to_string(Author a) { return a == Author::Human ? "human" : "simulated"; }

json to_json(const FeedbackItem& item) {
  json j{{"kind", kind_of(item)}};
  std::visit(overloaded{[&](const AdjustWeight& a) {
                          j["term"] = a.term;
                          j["delta"] = a.delta;
                        },
                        [&](const SetThreshold& s) {
                          j["property"] = obj::to_string(s.property);
                          j["value"] = s.value;
                        },
                        [&](const PenalizeSubstructure& p) {
                          j["pattern"] = p.pattern;
                          j["lambda"] = p.lambda;
                        },
                        [&](const RewardSubstructure& r) {
                          j["pattern"] = r.pattern;
                          j["lambda"] = r.lambda;
                        },
                        [&](const FreeText& f) { j["text"] = f.text; },
                        [](const NoOp&) {}},
             item);
  return j;
}

json to_json(const FeedbackRecord& r) {
  json items = json::array();
  for (const auto& i : r.items) items.push_back(to_json(i));
  return {{"id", r.id}, {"round", r.round}, {"author", to_string(r.author)}, {"items", std::move(items)}};
}

FeedbackItem item_from_json(const json& j) {
  const std::string kind = string_field(j, "kind");
  if (kind == "adjust_weight") return AdjustWeight{string_field(j, "term"), number_field(j, "delta")};
  if (kind == "set_threshold") {
    const auto p = obj::property_from_string(string_field(j, "property"));
    if (!p) throw SchemaViolation("unknown property '" + j.at("property").get<std::string>() + "'");
    return SetThreshold{*p, number_field(j, "value")};
  }
  if (kind == "penalize_substructure" || kind == "reward_substructure") {
    const std::string pattern = string_field(j, "pattern");
    const double lambda = j.contains("lambda") ? number_field(j, "lambda") : 0.1;
    if (lambda < 0) throw SchemaViolation("lambda must be >= 0");
    if (kind == "penalize_substructure") return PenalizeSubstructure{pattern, lambda};
    return RewardSubstructure{pattern, lambda};
  }
  if (kind == "free_text") return FreeText{string_field(j, "text")};
  if (kind == "no_op") return NoOp{};
  throw SchemaViolation("unknown feedback kind '" + kind + "'");
}

FeedbackRecord record_from_json(const json& j) {
  FeedbackRecord r;
  r.id = string_field(j, "id");
  if (r.id.empty()) throw SchemaViolation("feedback id must be non-empty");
  if (j.contains("round")) {
    if (!j["round"].is_number_integer()) throw SchemaViolation("field 'round' must be an integer");
    r.round = j["round"].get<int>();
  }
  const std::string author = j.contains("author") ? string_field(j, "author") : "human";
  if (author == "human") {
    r.author = Author::Human;
  } else if (author == "simulated") {
    r.author = Author::Simulated;
  } else {
    throw SchemaViolation("author must be 'human' or 'simulated'");
  }
  const auto& items = field(j, "items");
  if (!items.is_array() || items.empty()) throw SchemaViolation("items must be a non-empty array");
  for (const auto& i : items) r.items.push_back(item_from_json(i));
  return r;
}

}  // namespace fragmenta::tuning
