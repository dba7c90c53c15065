#pragma once

#include <span>
#include <string>
#include <vector>

#include "fragmenta/chem/molecule.hpp"
#include "fragmenta/obj/objective.hpp"
#include "fragmenta/tuning/feedback.hpp"
#include "fragmenta/tuning/knowledge.hpp"
#include "json.hpp"

namespace fragmenta::tuning {

struct PropertyLimit {
  obj::Property property = obj::Property::MolWeight;
  double limit = 500.0;
  obj::Direction direction = obj::Direction::Above;  // violated when above the limit
};

/// What the simulated chemist cares about beyond the rules already in the kb.
struct ChemistPersona {
  std::vector<PropertyLimit> limits{{obj::Property::MolWeight, 500.0, obj::Direction::Above},
                                    {obj::Property::LogP, 5.0, obj::Direction::Above}};
  std::vector<std::string> avoid_patterns;
  std::size_t review_top = 50;
  double violation_fraction = 0.2;
  double weight_step = 0.25;
  double pattern_step = 0.2;
  double diversity_floor = 0.0;  // 0 disables the diversity check
  double diversity_step = 0.1;
};

nlohmann::json to_json(const ChemistPersona& p);
ChemistPersona persona_from_json(const nlohmann::json& j);

/// Reviews the first persona.review_top molecules (in rank order). Each
/// property limit or pattern violated by at least violation_fraction of them
/// yields one corrective item: SetThreshold while the objective's threshold
/// is looser than the limit, then AdjustWeight on that penalty; patterns
/// yield PenalizeSubstructure. Low diversity yields AdjustWeight(diversity).
/// A compliant batch yields a single NoOp. Deterministic.
FeedbackRecord simulated_chemist(std::span<const chem::Molecule> ranked, const KnowledgeBase& kb,
                                 const obj::ObjectiveSpec& spec, int round, const ChemistPersona& persona = {});

}  // namespace fragmenta::tuning
