#pragma once

#include <span>
#include <vector>

#include "fragmenta/chem/fingerprint.hpp"
#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::parallel {

// Every kernel has a serial and an OpenMP path. Both reduce in the same fixed
// order (per-row partial sums, then rows in index order), so they return
// bit-identical results; the serial path is the reference for tests.
enum class Exec { Serial, Parallel };

std::vector<chem::Fingerprint> fingerprints(std::span<const chem::Molecule> mols, int radius, int width,
                                            Exec exec = Exec::Parallel);

/// Mean of (1 - tanimoto) over unordered pairs; 0 for fewer than 2 items.
double mean_pairwise_distance(std::span<const chem::Fingerprint> fps, Exec exec = Exec::Parallel);

/// Per item: mean (1 - tanimoto) to every other item; 0 for a singleton.
std::vector<double> mean_distance_to_rest(std::span<const chem::Fingerprint> fps, Exec exec = Exec::Parallel);

/// Per generated item: min (1 - tanimoto) over the reference set.
std::vector<double> nearest_distances(std::span<const chem::Fingerprint> generated,
                                      std::span<const chem::Fingerprint> reference, Exec exec = Exec::Parallel);

/// Mean of nearest_distances; 0 for an empty generated set.
double chamfer_distance(std::span<const chem::Fingerprint> generated, std::span<const chem::Fingerprint> reference,
                        Exec exec = Exec::Parallel);

/// Fixed-order sum used by every reduction above.
double ordered_sum(std::span<const double> values);

}  // namespace fragmenta::parallel
