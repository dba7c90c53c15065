#include "fragmenta/frag/vocabulary.hpp"

namespace fragmenta::frag {

bool Vocabulary::add(const Fragment& f, std::size_t occurrences) {
  auto [it, inserted] = entries_.try_emplace(f.key(), Entry{f, 0});
  it->second.count += occurrences;
  return inserted;
}

void Vocabulary::add(const Decomposition& d) {
  for (const auto& inst : d.fragments) add(inst.fragment);
}

void Vocabulary::dump(std::ostream& out) const {
  for (const auto& [key, e] : entries_) out << key << '\t' << e.count << '\n';
}

nlohmann::json Vocabulary::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, e] : entries_) j[key] = e.count;
  return j;
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  for (const auto& [key, count] : j.items()) v.add(Fragment::from_key(key), count.get<std::size_t>());
  return v;
}

Vocabulary fragment_vocabulary(std::span<const Decomposition> decompositions) {
  Vocabulary v;
  for (const auto& d : decompositions) v.add(d);
  return v;
}

}  // namespace fragmenta::frag
