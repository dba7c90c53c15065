#pragma once

#include <span>
#include <vector>

#include "fragmenta/frag/fragment.hpp"
#include "fragmenta/frag/vocabulary.hpp"
#include "fragmenta/qlearn/qtable.hpp"

namespace fragmenta::qlearn {

inline constexpr double kDefaultReconstructionReward = 1.0;

/// Registers every vocabulary fragment. Keys materialize lazily on update.
/// Returns how many fragments were new.
std::size_t insert_fragments(QTable& q, const frag::Vocabulary& vocab);

ConnectionKey connection_key(const frag::Decomposition& d, const frag::ConnectionRecord& c);
std::vector<ConnectionKey> connection_keys(const frag::Decomposition& d);

/// One update(key, r_recon) per connection of the decomposition.
void reward_reconstruction(QTable& q, const frag::Decomposition& d, double r_recon = kDefaultReconstructionReward);

/// Molecule i's connections each receive update(key, individual[i] + group[i]).
/// Throws std::invalid_argument when the three spans differ in length.
void distribute_rewards(QTable& q, std::span<const std::vector<ConnectionKey>> connections,
                        std::span<const double> individual, std::span<const double> group);

}  // namespace fragmenta::qlearn
