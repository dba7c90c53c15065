#include "fragmenta/gen/rank.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace fragmenta::gen {

std::vector<RankedMolecule> rank_outputs(std::span<const GeneratedMolecule> batch, const obj::ObjectiveSpec& spec,
                                         std::size_t top_n, const obj::PropertyProvider& provider) {
  if (top_n > batch.size()) throw std::invalid_argument("rank_outputs: top_n exceeds batch size");
  const obj::CompiledObjective objective(spec, provider);
  const std::size_t n = batch.size();
  std::vector<double> score(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) score[i] = objective.score_individual(batch[i].molecule);
  if (objective.diversity_lambda() > 0.0 && n > 1) {
    std::vector<chem::Molecule> mols;
    mols.reserve(n);
    for (const auto& g : batch) mols.push_back(g.molecule);
    const auto group = obj::score_group(mols, spec);
    for (std::size_t i = 0; i < n; ++i) score[i] += group[i];
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    if (batch[a].smiles != batch[b].smiles) return batch[a].smiles < batch[b].smiles;
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(top_n), order.end(), better);

  std::vector<RankedMolecule> out;
  out.reserve(top_n);
  for (std::size_t k = 0; k < top_n; ++k)
    out.push_back({batch[order[k]], score[order[k]], static_cast<int>(k + 1)});
  return out;
}

}  // namespace fragmenta::gen
