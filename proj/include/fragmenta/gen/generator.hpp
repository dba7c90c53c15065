#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fragmenta/chem/canonical.hpp"
#include "fragmenta/frag/vocabulary.hpp"
#include "fragmenta/qlearn/qtable.hpp"
#include "fragmenta/util/rng.hpp"

namespace fragmenta::gen {

enum class Strategy { Ran, Bal };

std::string to_string(Strategy s);
/// Accepts "ran" / "bal". Throws std::invalid_argument otherwise.
Strategy strategy_from_string(const std::string& s);

struct GenerationConfig {
  Strategy strategy = Strategy::Ran;
  int top_r = 10;
  double temperature = 1.0;
  int max_fragments = 12;
  std::uint64_t rng_seed = 0;
  std::size_t batch_size = 1000;
  // Unmaterialized pairings and low scores count as epsilon. Off means pure
  // exploitation: only connections with a table entry can be drawn.
  bool epsilon_floor = true;

  /// Throws std::invalid_argument on top_r < 1, temperature <= 0 or
  /// max_fragments < 1.
  void validate() const;
};

struct GeneratedMolecule {
  chem::Molecule molecule;
  chem::CanonicalSmiles smiles;
  std::vector<qlearn::ConnectionKey> connections_used;
  int fragment_count = 0;
  std::string seed_fragment;
  // Fragment instances in the order they were placed and the links between
  // them, enough to rebuild the molecule with frag::reassemble.
  std::vector<std::string> fragment_keys;
  std::vector<frag::Link> links;
  int capped_sites = 0;
  int dead_ends = 0;
};

/// Read-only view of a Q-table snapshot and vocabulary laid out for sampling.
class GenerationIndex {
 public:
  /// Throws std::invalid_argument for an empty vocabulary.
  GenerationIndex(const qlearn::QTable& q, const frag::Vocabulary& vocab, bool epsilon_floor = true);

  struct Slot {
    int fragment;
    int site;
    chem::BondOrder order;
  };

  std::size_t fragment_count() const noexcept { return fragments_.size(); }
  const frag::Fragment& fragment(int i) const { return fragments_[static_cast<std::size_t>(i)]; }
  const std::vector<Slot>& slots() const noexcept { return slots_; }
  int slot_of(int fragment, int site) const;
  const std::vector<double>& seed_weights() const noexcept { return seed_weights_; }

  /// Slots whose site bond order matches slot s, with their weights.
  void candidates(int s, std::vector<int>& out_slots, std::vector<double>& out_weights) const;

 private:
  std::vector<frag::Fragment> fragments_;
  std::vector<Slot> slots_;
  std::vector<int> first_slot_;
  std::map<chem::BondOrder, std::vector<int>> by_order_;
  // Materialized weights per slot, keyed by partner slot.
  std::vector<std::map<int, double>> overrides_;
  std::vector<double> seed_weights_;
  double base_weight_ = 0.0;
};

GeneratedMolecule generate_one(const GenerationIndex& index, const GenerationConfig& cfg, Rng& rng);

/// Item i of a batch, drawn from the stream derive_seed(cfg.rng_seed, i).
GeneratedMolecule generate_item(const GenerationIndex& index, const GenerationConfig& cfg, std::uint64_t i);

/// OpenMP over items; identical output to generate_batch_serial.
std::vector<GeneratedMolecule> generate_batch(const GenerationIndex& index, const GenerationConfig& cfg);
std::vector<GeneratedMolecule> generate_batch_serial(const GenerationIndex& index, const GenerationConfig& cfg);
std::vector<GeneratedMolecule> generate_batch(const qlearn::QTable& q, const frag::Vocabulary& vocab,
                                              const GenerationConfig& cfg);

}  // namespace fragmenta::gen
