#pragma once

#include <cstdint>
#include <vector>

#include "fragmenta/frag/fragment.hpp"
#include "fragmenta/qlearn/qtable.hpp"

namespace fragmenta::frag {

/// Per site: the summed q of materialized entries at that site, floored at
/// the exploration prior epsilon. Summed over sites.
double mfr_score(const std::string& key, int site_count, const qlearn::QTable& q);
double mfr_score(const Fragment& f, const qlearn::QTable& q);

enum class DecompositionScore { Sum, Mean };

struct DecompositionConfig {
  int k = 20;
  int max_cuts = 4;
  double explore_prob = 0.15;
  std::uint64_t rng_seed = 0;
  DecompositionScore score = DecompositionScore::Sum;
};

/// Candidate cut sets considered by decompose(): every subset of size
/// <= max_cuts when there are at most k of them, otherwise k distinct random
/// subsets with sizes uniform in [0, max_cuts].
std::vector<std::vector<int>> candidate_cuts(const Molecule& m, const DecompositionConfig& cfg);

double decomposition_score(const Decomposition& d, const qlearn::QTable& q, DecompositionScore mode);

/// MFR-ranked decomposition. Throws std::invalid_argument when k < 1.
Decomposition decompose(const Molecule& m, const qlearn::QTable& q, const DecompositionConfig& cfg);

}  // namespace fragmenta::frag
