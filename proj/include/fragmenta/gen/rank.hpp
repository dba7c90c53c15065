#pragma once

#include <span>
#include <vector>

#include "fragmenta/gen/generator.hpp"
#include "fragmenta/obj/objective.hpp"

namespace fragmenta::gen {

struct RankedMolecule {
  GeneratedMolecule item;
  double score = 0.0;
  int rank = 0;  // 1-based
};

/// Top `top_n` by objective score, descending; equal scores fall back to
/// canonical string order. The score is score_individual plus, when the
/// objective has a diversity term, the molecule's group contribution within
/// this batch. Throws std::invalid_argument if top_n exceeds the batch size.
std::vector<RankedMolecule> rank_outputs(std::span<const GeneratedMolecule> batch, const obj::ObjectiveSpec& spec,
                                         std::size_t top_n,
                                         const obj::PropertyProvider& provider = obj::default_provider());

}  // namespace fragmenta::gen
