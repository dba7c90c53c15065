#include "fragmenta/parallel/kernels.hpp"

#include <algorithm>
#include <bit>
#include <limits>

namespace fragmenta::parallel {

double ordered_sum(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

std::vector<chem::Fingerprint> fingerprints(std::span<const chem::Molecule> mols, int radius, int width, Exec exec) {
  std::vector<chem::Fingerprint> out(mols.size());
  const auto n = static_cast<long>(mols.size());
  if (exec == Exec::Serial) {
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = chem::morgan_fingerprint(mols[static_cast<std::size_t>(i)], radius, width);
    return out;
  }
#pragma omp parallel for schedule(dynamic, 32)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = chem::morgan_fingerprint(mols[static_cast<std::size_t>(i)], radius, width);
  return out;
}

namespace {

// Popcounts are cached per fingerprint; either = |a| + |b| - both gives the
// same integers as chem::tanimoto, so results match it exactly.
struct Counted {
  std::span<const chem::Fingerprint> fps;
  std::vector<int> counts;

  explicit Counted(std::span<const chem::Fingerprint> f) : fps(f), counts(f.size()) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i].width() != f[0].width()) (void)chem::tanimoto(f[i], f[0]);  // throws WidthMismatch
      counts[i] = f[i].count();
    }
  }

  double distance(std::size_t i, std::size_t j) const {
    const auto& a = fps[i].words();
    const auto& b = fps[j].words();
    int both = 0;
    for (std::size_t w = 0; w < a.size(); ++w) both += std::popcount(a[w] & b[w]);
    const int either = counts[i] + counts[j] - both;
    return 1.0 - (either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either));
  }
};

// Row i: sum over j > i of (1 - tanimoto).
double upper_row(const Counted& c, std::size_t i) {
  double row = 0.0;
  for (std::size_t j = i + 1; j < c.fps.size(); ++j) row += c.distance(i, j);
  return row;
}

// Row i: sum over j != i of (1 - tanimoto), in j order.
double full_row(const Counted& c, std::size_t i) {
  double row = 0.0;
  for (std::size_t j = 0; j < c.fps.size(); ++j)
    if (j != i) row += c.distance(i, j);
  return row;
}

double nearest(const chem::Fingerprint& g, std::span<const chem::Fingerprint> reference) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : reference) best = std::min(best, 1.0 - chem::tanimoto(g, r));
  return best;
}

}  // namespace

double mean_pairwise_distance(std::span<const chem::Fingerprint> fps, Exec exec) {
  const std::size_t n = fps.size();
  if (n < 2) return 0.0;
  const Counted c(fps);
  std::vector<double> rows(n, 0.0);
  const auto ln = static_cast<long>(n);
  if (exec == Exec::Serial) {
    for (long i = 0; i < ln; ++i) rows[static_cast<std::size_t>(i)] = upper_row(c, static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < ln; ++i) rows[static_cast<std::size_t>(i)] = upper_row(c, static_cast<std::size_t>(i));
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return ordered_sum(rows) / pairs;
}

std::vector<double> mean_distance_to_rest(std::span<const chem::Fingerprint> fps, Exec exec) {
  const std::size_t n = fps.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  const auto ln = static_cast<long>(n);
  const double others = static_cast<double>(n - 1);
  const Counted c(fps);
  if (exec == Exec::Serial) {
    for (long i = 0; i < ln; ++i) out[static_cast<std::size_t>(i)] = full_row(c, static_cast<std::size_t>(i)) / others;
  } else {
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < ln; ++i) out[static_cast<std::size_t>(i)] = full_row(c, static_cast<std::size_t>(i)) / others;
  }
  return out;
}

std::vector<double> nearest_distances(std::span<const chem::Fingerprint> generated,
                                      std::span<const chem::Fingerprint> reference, Exec exec) {
  std::vector<double> out(generated.size(), 0.0);
  if (reference.empty()) return out;
  const auto n = static_cast<long>(generated.size());
  if (exec == Exec::Serial) {
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = nearest(generated[static_cast<std::size_t>(i)], reference);
  } else {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = nearest(generated[static_cast<std::size_t>(i)], reference);
  }
  return out;
}

double chamfer_distance(std::span<const chem::Fingerprint> generated, std::span<const chem::Fingerprint> reference,
                        Exec exec) {
  if (generated.empty()) return 0.0;
  const auto d = nearest_distances(generated, reference, exec);
  return ordered_sum(d) / static_cast<double>(d.size());
}

}  // namespace fragmenta::parallel
