#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragmenta/obj/objective.hpp"
#include "fragmenta/tuning/feedback.hpp"
#include "fragmenta/tuning/knowledge.hpp"

namespace fragmenta::tuning {

class ReasonerUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Translation {
  std::vector<FeedbackItem> items;  // never FreeText
  double confidence = 0.0;
};

/// Turns free text into structured feedback. The only place where the
/// tuning pipeline is allowed to be nondeterministic.
class Reasoner {
 public:
  virtual ~Reasoner() = default;
  virtual std::string name() const = 0;
  virtual Translation translate(const std::string& text, const obj::ObjectiveSpec& spec,
                                const KnowledgeBase& kb) const = 0;
};

/// Phrase table. Matching is case-insensitive on substrings; every matching
/// row contributes its item. Confidence is 0.4 when anything matched, below the
/// approval threshold, so human-agent sessions confirm phrase guesses.
class KeywordReasoner final : public Reasoner {
 public:
  static constexpr double kConfidence = 0.4;
  std::string name() const override { return "keyword-v1"; }
  Translation translate(const std::string& text, const obj::ObjectiveSpec& spec,
                        const KnowledgeBase& kb) const override;
};

/// POSTs {text, spec, kb_digest} as JSON and expects {items, confidence}.
/// The bearer token comes from the environment variable named by token_env.
class HttpReasoner final : public Reasoner {
 public:
  struct Options {
    std::string url;  // http://host[:port]/path
    std::string token_env = "FRAGMENTA_REASONER_TOKEN";
    std::chrono::milliseconds timeout{5000};
  };

  explicit HttpReasoner(Options options);
  std::string name() const override { return "http:" + options_.url; }
  /// Throws ReasonerUnavailable on connection failure, timeout or non-2xx,
  /// SchemaViolation on a nonconforming body.
  Translation translate(const std::string& text, const obj::ObjectiveSpec& spec,
                        const KnowledgeBase& kb) const override;

  /// Validates a response body; exposed for tests.
  static Translation parse_response(const std::string& body);

 private:
  Options options_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

}  // namespace fragmenta::tuning
