#include "fragmenta/frag/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "fragmenta/util/rng.hpp"

namespace fragmenta::frag {

double mfr_score(const std::string& key, int site_count, const qlearn::QTable& q) {
  double total = 0.0;
  for (int s = 0; s < site_count; ++s) {
    double site = 0.0;
    for (const auto& [k, e] : q.entries_at(key, s)) site += e.q;
    total += std::max(site, q.epsilon());
  }
  return total;
}

double mfr_score(const Fragment& f, const qlearn::QTable& q) { return mfr_score(f.key(), f.site_count(), q); }

namespace {

// Number of subsets of size <= m from n items, saturating at `cap`.
std::uint64_t subset_count(int n, int m, std::uint64_t cap) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;
  for (int s = 0; s <= m; ++s) {
    if (s > 0) {
      // binom(n, s) = binom(n, s-1) * (n-s+1) / s, exact at every step.
      if (binom > cap) return cap + 1;
      binom = binom * static_cast<std::uint64_t>(n - s + 1) / static_cast<std::uint64_t>(s);
    }
    total += binom;
    if (total > cap) return cap + 1;
  }
  return total;
}

void combinations(const std::vector<int>& items, int size, std::size_t start, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == size) {
    out.push_back(current);
    return;
  }
  for (std::size_t i = start; i < items.size(); ++i) {
    current.push_back(items[i]);
    combinations(items, size, i + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> candidate_cuts(const Molecule& m, const DecompositionConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("decompose: k must be >= 1");
  const auto cuttable = cuttable_bonds(m);
  const int n = static_cast<int>(cuttable.size());
  const int max_size = std::clamp(cfg.max_cuts, 0, n);
  std::vector<std::vector<int>> out;
  const auto k = static_cast<std::uint64_t>(cfg.k);
  if (subset_count(n, max_size, k) <= k) {
    std::vector<int> current;
    for (int s = 0; s <= max_size; ++s) combinations(cuttable, s, 0, current, out);
    return out;
  }
  Rng rng(cfg.rng_seed);
  std::set<std::vector<int>> seen;
  const std::uint64_t max_attempts = 1000 * k;
  for (std::uint64_t attempt = 0; attempt < max_attempts && out.size() < k; ++attempt) {
    const int size = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_size) + 1));
    std::vector<int> pool = cuttable;
    for (int i = 0; i < size; ++i) {
      const auto j = static_cast<std::size_t>(i) + uniform_index(rng, pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<int> subset(pool.begin(), pool.begin() + size);
    std::sort(subset.begin(), subset.end());
    if (seen.insert(subset).second) out.push_back(std::move(subset));
  }
  return out;
}

double decomposition_score(const Decomposition& d, const qlearn::QTable& q, DecompositionScore mode) {
  double total = 0.0;
  for (const auto& inst : d.fragments) total += mfr_score(inst.fragment, q);
  if (mode == DecompositionScore::Mean && !d.fragments.empty()) total /= static_cast<double>(d.fragments.size());
  return total;
}

Decomposition decompose(const Molecule& m, const qlearn::QTable& q, const DecompositionConfig& cfg) {
  const auto candidates = candidate_cuts(m, cfg);
  std::vector<Decomposition> decs;
  std::vector<double> scores;
  decs.reserve(candidates.size());
  for (const auto& cuts : candidates) {
    decs.push_back(apply_cuts(m, cuts));
    scores.push_back(decomposition_score(decs.back(), q, cfg.score));
  }
  // Separate stream from the candidate sampler so the explore draw does not
  // depend on how many sampling attempts were needed.
  Rng rng(derive_seed(cfg.rng_seed, 0x6578706c6f7265ULL));
  if (cfg.explore_prob > 0.0 && uniform01(rng) < cfg.explore_prob)
    return std::move(decs[uniform_index(rng, decs.size())]);

  constexpr double kTie = 1e-12;
  std::size_t best = 0;
  std::vector<std::string> best_keys = decs[0].sorted_keys();
  for (std::size_t i = 1; i < decs.size(); ++i) {
    const double diff = scores[i] - scores[best];
    if (diff < -kTie) continue;
    if (diff <= kTie) {
      // Tie: fewer cuts, then lexicographically smaller fragment keys.
      const auto ci = decs[i].cut_bonds.size();
      const auto cb = decs[best].cut_bonds.size();
      if (ci > cb) continue;
      if (ci == cb) {
        auto keys = decs[i].sorted_keys();
        if (!(keys < best_keys)) continue;
        best = i;
        best_keys = std::move(keys);
        continue;
      }
    }
    best = i;
    best_keys = decs[i].sorted_keys();
  }
  return std::move(decs[best]);
}

}  // namespace fragmenta::frag
