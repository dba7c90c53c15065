#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fragmenta/app/config.hpp"
#include "fragmenta/chem/molecule.hpp"
#include "fragmenta/frag/vocabulary.hpp"
#include "fragmenta/gen/generator.hpp"
#include "fragmenta/qlearn/qtable.hpp"
#include "json.hpp"

namespace fragmenta::app {

struct EpochMetrics {
  int epoch = 0;
  std::size_t batch_molecules = 0;
  std::size_t vocab_size = 0;
  std::size_t q_entries = 0;
  double mean_q = 0.0;
  std::size_t samples = 0;
  std::size_t unique_samples = 0;
  double mean_individual = 0.0;
  double mean_group = 0.0;
  double mean_mw = 0.0;
  bool operator==(const EpochMetrics&) const = default;
};

nlohmann::json to_json(const EpochMetrics& m);
EpochMetrics epoch_metrics_from_json(const nlohmann::json& j);
std::string metrics_csv_header();
std::string metrics_csv_row(const EpochMetrics& m);

/// Everything a run needs to continue. Every random stream is derived from
/// (seed, epoch, item), so the epoch counter is the whole rng state.
struct RunState {
  std::string config_digest;
  std::uint64_t seed = 0;
  int epoch = 0;
  qlearn::QTable q;
  frag::Vocabulary vocab;
  obj::ObjectiveSpec objective;
  std::vector<EpochMetrics> metrics;  // append-only, one per epoch

  static RunState fresh(const RunConfig& config);
  /// FNV-1a over the full serialized state.
  std::string digest() const;

  nlohmann::json to_json() const;  // without the Q-table
  /// Writes run_dir/state.json and run_dir/qtable.json.
  void persist(const std::string& run_dir) const;
  static RunState restore(const std::string& run_dir);
};

/// Training molecules selected for an epoch: all of them when the dataset fits
/// in one minibatch, else a seeded sample without replacement.
std::vector<std::size_t> epoch_batch(std::size_t dataset_size, const RunConfig& config, std::uint64_t seed, int epoch);

/// One pass of the loop: select batch, decompose against the current table,
/// grow the vocabulary, reward reconstruction, sample molecules, score them
/// and distribute the rewards. An objective whose lambdas are all zero gives
/// no signal, so that last step is skipped.
void train_epoch(RunState& state, std::span<const chem::Molecule> dataset, const RunConfig& config);

/// Generation config for a run seeded from (seed, tag, counter).
gen::GenerationConfig generation_config(const RunConfig& config, std::uint64_t seed, std::uint64_t tag,
                                        std::uint64_t counter, std::size_t batch_size);

inline constexpr std::uint64_t kStreamBatch = 0x6261746368;
inline constexpr std::uint64_t kStreamDecompose = 0x6465636f6d70;
inline constexpr std::uint64_t kStreamEpochSamples = 0x73616d706c65;
inline constexpr std::uint64_t kStreamRound = 0x726f756e64;
inline constexpr std::uint64_t kStreamGenerate = 0x67656e6572617465;

}  // namespace fragmenta::app
