#pragma once

#include <cstdint>
#include <vector>

#include "fragmenta/chem/molecule.hpp"

namespace fragmenta::chem {

/// Fixed-width bitset from hashed circular atom environments.
class Fingerprint {
 public:
  Fingerprint() = default;
  explicit Fingerprint(int width);

  int width() const noexcept { return width_; }
  void set(int bit);
  bool test(int bit) const;
  int count() const noexcept;
  std::vector<int> on_bits() const;
  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  bool operator==(const Fingerprint&) const = default;

 private:
  int width_ = 0;
  std::vector<std::uint64_t> words_;
};

inline constexpr int kDefaultFingerprintRadius = 2;
inline constexpr int kDefaultFingerprintWidth = 2048;

/// Morgan-style fingerprint. Environments of radius 0..radius are hashed; an
/// environment is skipped when it covers no new bonds or repeats the bond set
/// of an environment from an earlier radius.
Fingerprint morgan_fingerprint(const Molecule& m, int radius = kDefaultFingerprintRadius,
                               int width = kDefaultFingerprintWidth);

/// Hashed environment identifiers before folding, for inspection and tests.
std::vector<std::uint64_t> morgan_environments(const Molecule& m, int radius);

/// |a and b| / |a or b|; 1.0 when both are empty. Throws WidthMismatch.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

}  // namespace fragmenta::chem
