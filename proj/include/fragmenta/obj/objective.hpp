#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragmenta/chem/fingerprint.hpp"
#include "fragmenta/chem/molecule.hpp"
#include "fragmenta/chem/properties.hpp"
#include "fragmenta/obj/providers.hpp"
#include "json.hpp"

namespace fragmenta::obj {

enum class TermKind { PropertyPenalty, SubstructurePenalty, SubstructureBonus, DiversityGroup, SynthesizabilityProxy };
enum class Property { MolWeight, LogP, Hbd, Hba, RotatableBonds, Qed, Sa };
enum class Direction { Above, Below };  // violated when value > / < threshold
enum class PenaltyMode { Hard, Hinge };

std::string to_string(TermKind k);
std::string to_string(Property p);
std::string to_string(Direction d);
std::string to_string(PenaltyMode m);
TermKind term_kind_from_string(const std::string& s);
/// Accepts canonical names plus common aliases ("MW", "logP", ...).
std::optional<Property> property_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);
PenaltyMode penalty_mode_from_string(const std::string& s);

/// Term name used for the penalty on a property ("mw_penalty", ...).
std::string penalty_term_name(Property p);
inline constexpr const char* kDiversityTerm = "diversity";
inline constexpr const char* kSynthesizabilityTerm = "synthesizability";

struct ObjectiveTerm {
  std::string name;
  TermKind kind = TermKind::PropertyPenalty;
  double lambda = 0.0;
  // property_penalty
  Property property = Property::MolWeight;
  double threshold = 0.0;
  Direction direction = Direction::Above;
  PenaltyMode mode = PenaltyMode::Hard;
  double hinge_width = 1.0;  // value distance over which a hinge penalty reaches lambda
  // substructure terms
  std::string pattern;
  std::vector<std::string> provenance;

  bool operator==(const ObjectiveTerm&) const = default;
};

class UnknownTerm : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ObjectiveSpec {
  std::vector<ObjectiveTerm> terms;
  int version = 0;

  const ObjectiveTerm* find(const std::string& name) const;
  ObjectiveTerm* find(const std::string& name);
  /// Sum of every lambda.
  double total_lambda() const;
  double lambda_of(const std::string& name) const;

  bool operator==(const ObjectiveSpec&) const = default;
};

/// The internal-dataset objective: hard penalties at MW > 500 and logP > 5.
ObjectiveSpec internal_objective();

nlohmann::json to_json(const ObjectiveTerm& t);
nlohmann::json to_json(const ObjectiveSpec& s);
ObjectiveTerm term_from_json(const nlohmann::json& j);
ObjectiveSpec spec_from_json(const nlohmann::json& j);

double property_value(Property p, const chem::PropertyVector& v, const chem::Molecule& m,
                      const PropertyProvider& provider);

/// Objective with its substructure patterns parsed once. Throws
/// chem::SmilesError when a pattern does not parse.
class CompiledObjective {
 public:
  explicit CompiledObjective(ObjectiveSpec spec, const PropertyProvider& provider = default_provider());

  const ObjectiveSpec& spec() const noexcept { return spec_; }
  double score_individual(const chem::Molecule& m) const;
  double diversity_lambda() const noexcept { return diversity_lambda_; }

 private:
  ObjectiveSpec spec_;
  const PropertyProvider* provider_;
  std::vector<std::optional<chem::Molecule>> patterns_;
  double diversity_lambda_ = 0.0;
};

/// 1 - weighted penalties + bonuses, clamped to [0, 1].
double score_individual(const chem::Molecule& m, const ObjectiveSpec& spec,
                        const PropertyProvider& provider = default_provider());

/// lambda_diversity * mean (1 - tanimoto) from each molecule to the others.
std::vector<double> score_group(std::span<const chem::Molecule> batch, const ObjectiveSpec& spec,
                                int radius = chem::kDefaultFingerprintRadius,
                                int width = chem::kDefaultFingerprintWidth);
std::vector<double> score_group(std::span<const chem::Fingerprint> fps, const ObjectiveSpec& spec);

}  // namespace fragmenta::obj
