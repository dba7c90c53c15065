#include "fragmenta/qlearn/rewards.hpp"

#include <stdexcept>

namespace fragmenta::qlearn {

std::size_t insert_fragments(QTable& q, const frag::Vocabulary& vocab) {
  std::size_t added = 0;
  for (const auto& [key, entry] : vocab.entries()) added += q.insert_fragment(key, entry.fragment.site_count());
  return added;
}

ConnectionKey connection_key(const frag::Decomposition& d, const frag::ConnectionRecord& c) {
  return ConnectionKey::make(d.fragments[static_cast<std::size_t>(c.fragment_a)].fragment.key(), c.site_a,
                             d.fragments[static_cast<std::size_t>(c.fragment_b)].fragment.key(), c.site_b);
}

std::vector<ConnectionKey> connection_keys(const frag::Decomposition& d) {
  std::vector<ConnectionKey> keys;
  for (const auto& c : d.connections) keys.push_back(connection_key(d, c));
  return keys;
}

void reward_reconstruction(QTable& q, const frag::Decomposition& d, double r_recon) {
  for (const auto& c : d.connections) q.update(connection_key(d, c), r_recon);
}

void distribute_rewards(QTable& q, std::span<const std::vector<ConnectionKey>> connections,
                        std::span<const double> individual, std::span<const double> group) {
  if (connections.size() != individual.size() || connections.size() != group.size())
    throw std::invalid_argument("distribute_rewards: batch and reward lists are not aligned");
  for (std::size_t i = 0; i < connections.size(); ++i)
    for (const auto& key : connections[i]) q.update(key, individual[i] + group[i]);
}

}  // namespace fragmenta::qlearn
