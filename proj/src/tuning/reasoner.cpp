#include "fragmenta/tuning/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include "httplib.h"

namespace fragmenta::tuning {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool contains_any(const std::string& text, std::initializer_list<const char*> phrases) {
  return std::any_of(phrases.begin(), phrases.end(), [&](const char* p) { return text.find(p) != std::string::npos; });
}

double current_threshold(const obj::ObjectiveSpec& spec, obj::Property p, double fallback) {
  const auto* t = spec.find(obj::penalty_term_name(p));
  return t ? t->threshold : fallback;
}

}  // namespace

Translation KeywordReasoner::translate(const std::string& raw, const obj::ObjectiveSpec& spec,
                                       const KnowledgeBase&) const {
  const std::string text = lower(raw);
  Translation out;
  if (contains_any(text, {"too heavy", "too large", "too big", "smaller", "lighter", "molecular weight"})) {
    // 450 by default; a threshold already at or below that tightens by 50.
    const double now = current_threshold(spec, obj::Property::MolWeight, 500.0);
    out.items.push_back(SetThreshold{obj::Property::MolWeight, std::min(450.0, now - 50.0)});
  }
  if (contains_any(text, {"too greasy", "lipophilic", "logp", "too hydrophobic"})) {
    const double now = current_threshold(spec, obj::Property::LogP, 5.0);
    out.items.push_back(SetThreshold{obj::Property::LogP, std::min(4.0, now - 1.0)});
  }
  if (contains_any(text, {"more diverse", "diversity", "too similar", "repetitive"}))
    out.items.push_back(AdjustWeight{obj::kDiversityTerm, 0.1});
  if (contains_any(text, {"hard to make", "hard to synthesize", "synthesiz", "synthetic"}))
    out.items.push_back(AdjustWeight{obj::kSynthesizabilityTerm, 0.1});
  if (contains_any(text, {"nitro"})) out.items.push_back(PenalizeSubstructure{"[N+](=O)[O-]", 0.3});
  if (contains_any(text, {"acrylate"})) out.items.push_back(RewardSubstructure{"C=CC(=O)O", 0.1});
  out.confidence = out.items.empty() ? 0.0 : kConfidence;
  return out;
}

HttpReasoner::HttpReasoner(Options options) : options_(std::move(options)) {
  const std::string prefix = "http://";
  if (options_.url.rfind(prefix, 0) != 0) throw std::invalid_argument("reasoner url must start with http://");
  std::string rest = options_.url.substr(prefix.size());
  const auto slash = rest.find('/');
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  std::string authority = rest.substr(0, slash);
  if (const auto colon = authority.rfind(':'); colon != std::string::npos) {
    port_ = std::stoi(authority.substr(colon + 1));
    authority.resize(colon);
  }
  host_ = authority;
  if (host_.empty()) throw std::invalid_argument("reasoner url has no host");
}

Translation HttpReasoner::parse_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(std::string("reasoner response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("items") || !j["items"].is_array())
    throw SchemaViolation("reasoner response lacks an 'items' array");
  if (!j.contains("confidence") || !j["confidence"].is_number())
    throw SchemaViolation("reasoner response lacks a numeric 'confidence'");
  Translation t;
  t.confidence = j["confidence"].get<double>();
  if (!(t.confidence >= 0.0 && t.confidence <= 1.0)) throw SchemaViolation("confidence must lie in [0, 1]");
  for (const auto& item : j["items"]) {
    auto parsed = item_from_json(item);
    if (!is_structured(parsed)) throw SchemaViolation("reasoner must return structured items");
    t.items.push_back(std::move(parsed));
  }
  return t;
}

Translation HttpReasoner::translate(const std::string& text, const obj::ObjectiveSpec& spec,
                                    const KnowledgeBase& kb) const {
  httplib::Client client(host_, port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (const char* token = std::getenv(options_.token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);
  const json body{{"text", text}, {"spec", obj::to_json(spec)}, {"kb_digest", kb.digest()}};
  const auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw ReasonerUnavailable("reasoner request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw ReasonerUnavailable("reasoner returned HTTP " + std::to_string(res->status));
  return parse_response(res->body);
}

}  // namespace fragmenta::tuning
