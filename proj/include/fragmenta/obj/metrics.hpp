#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragmenta/chem/molecule.hpp"
#include "fragmenta/obj/providers.hpp"
#include "json.hpp"

namespace fragmenta::obj {

class EmptyBatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Target-class predicate: a molecule is a member when any line's pattern
/// occurs at least `min_count` times. Stored as data, one "<pattern> <count>"
/// per line, '#' comments allowed.
class MembershipPattern {
 public:
  struct Clause {
    std::string pattern;
    chem::Molecule compiled;
    std::size_t min_count = 1;
  };

  MembershipPattern() = default;
  static MembershipPattern parse(const std::string& text);
  static MembershipPattern load(const std::string& path);

  bool empty() const noexcept { return clauses_.empty(); }
  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  bool matches(const chem::Molecule& m) const;

 private:
  std::vector<Clause> clauses_;
};

struct EvaluationOptions {
  double sa_threshold = 6.0;  // synthesizable when proxy SA <= this
  int fingerprint_radius = 2;
  int fingerprint_width = 2048;
};

/// Percentages are in [0, 100]. Validity is over the input strings; every
/// other rate is over the valid molecules.
struct EvaluationReport {
  std::size_t total = 0;
  std::size_t valid = 0;
  double validity = 0.0;
  double uniqueness = 0.0;
  double novelty = 0.0;
  double diversity = 0.0;
  double chamfer = 0.0;
  double lipinski = 0.0;
  double scaffold_diversity = 0.0;
  std::size_t scaffold_count = 0;
  std::optional<double> membership;  // absent without a pattern
  double discovery_rate = 0.0;
  std::optional<double> discovery_rate_membership;
  double mean_qed = 0.0;
  double mean_sa = 0.0;
  double mean_mw = 0.0;
  double mean_logp = 0.0;
  std::string provider;
};

EvaluationReport evaluate(std::span<const std::string> generated, std::span<const chem::Molecule> training,
                          const MembershipPattern* membership = nullptr,
                          const PropertyProvider& provider = default_provider(),
                          const EvaluationOptions& options = {});

EvaluationReport evaluate(std::span<const chem::Molecule> generated, std::span<const chem::Molecule> training,
                          const MembershipPattern* membership = nullptr,
                          const PropertyProvider& provider = default_provider(),
                          const EvaluationOptions& options = {});

nlohmann::json to_json(const EvaluationReport& r);
EvaluationReport report_from_json(const nlohmann::json& j);

/// Aligned text table, one row per report, in the usual benchmark-table column order.
std::string render_table(std::span<const std::pair<std::string, EvaluationReport>> rows);
std::string render_table(const std::string& label, const EvaluationReport& r);

}  // namespace fragmenta::obj
