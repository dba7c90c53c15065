#include "fragmenta/gen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "fragmenta/frag/decompose.hpp"

namespace fragmenta::gen {

std::string to_string(Strategy s) { return s == Strategy::Ran ? "ran" : "bal"; }

Strategy strategy_from_string(const std::string& s) {
  if (s == "ran") return Strategy::Ran;
  if (s == "bal") return Strategy::Bal;
  throw std::invalid_argument("unknown strategy '" + s + "' (expected ran or bal)");
}

void GenerationConfig::validate() const {
  if (top_r < 1) throw std::invalid_argument("top_r must be >= 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (max_fragments < 1) throw std::invalid_argument("max_fragments must be >= 1");
}

GenerationIndex::GenerationIndex(const qlearn::QTable& q, const frag::Vocabulary& vocab, bool epsilon_floor) {
  if (vocab.empty()) throw std::invalid_argument("generation needs a non-empty vocabulary");
  std::map<std::string, int> fragment_of;
  for (const auto& [key, entry] : vocab.entries()) {
    fragment_of[key] = static_cast<int>(fragments_.size());
    first_slot_.push_back(static_cast<int>(slots_.size()));
    for (int s = 0; s < entry.fragment.site_count(); ++s) {
      const auto order = entry.fragment.sites()[static_cast<std::size_t>(s)].order;
      by_order_[order].push_back(static_cast<int>(slots_.size()));
      slots_.push_back({static_cast<int>(fragments_.size()), s, order});
    }
    fragments_.push_back(entry.fragment);
  }
  const double eps = q.epsilon();
  base_weight_ = epsilon_floor ? eps : 0.0;
  overrides_.resize(slots_.size());
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const auto& slot = slots_[s];
    const auto& key = fragments_[static_cast<std::size_t>(slot.fragment)].key();
    for (const auto& [k, e] : q.entries_at(key, slot.site)) {
      // The partner is whichever side is not this slot (both for self-pairs).
      const bool this_is_a = k.a == key && k.site_a == slot.site;
      const auto& other_key = this_is_a ? k.b : k.a;
      const int other_site = this_is_a ? k.site_b : k.site_a;
      auto it = fragment_of.find(other_key);
      if (it == fragment_of.end()) continue;
      const int t = slot_of(it->second, other_site);
      if (t < 0 || slots_[static_cast<std::size_t>(t)].order != slot.order) continue;
      overrides_[s][t] = epsilon_floor ? std::max(e.q, eps) : std::max(e.q, 0.0);
    }
  }
  for (const auto& f : fragments_) {
    const double mfr = frag::mfr_score(f, q);
    seed_weights_.push_back(epsilon_floor ? std::max(mfr, eps) : mfr);
  }
}

int GenerationIndex::slot_of(int fragment, int site) const {
  const auto& f = fragments_[static_cast<std::size_t>(fragment)];
  if (site < 0 || site >= f.site_count()) return -1;
  return first_slot_[static_cast<std::size_t>(fragment)] + site;
}

void GenerationIndex::candidates(int s, std::vector<int>& out_slots, std::vector<double>& out_weights) const {
  const auto& slot = slots_[static_cast<std::size_t>(s)];
  const auto& pool = by_order_.at(slot.order);
  const auto& over = overrides_[static_cast<std::size_t>(s)];
  out_slots.assign(pool.begin(), pool.end());
  out_weights.assign(pool.size(), base_weight_);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto it = over.find(pool[i]);
    if (it != over.end()) out_weights[i] = it->second;
  }
}

namespace {

struct OpenSite {
  int instance;
  int site;
  int host_atom;
  chem::BondOrder order;
};

int choose(const GenerationConfig& cfg, const std::vector<double>& w, Rng& rng, std::vector<int>& scratch) {
  if (cfg.strategy == Strategy::Ran) {
    scratch.clear();
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] > 0.0) scratch.push_back(static_cast<int>(i));
    if (scratch.empty()) return -1;
    const std::size_t r = std::min(scratch.size(), static_cast<std::size_t>(cfg.top_r));
    std::sort(scratch.begin(), scratch.end(), [&](int a, int b) {
      const double wa = w[static_cast<std::size_t>(a)];
      const double wb = w[static_cast<std::size_t>(b)];
      return wa != wb ? wa > wb : a < b;
    });
    // Candidates tied with the r-th weight compete for the remaining places
    // at random, so the pool is uniform over every valid top-r choice.
    const double cutoff = w[static_cast<std::size_t>(scratch[r - 1])];
    std::size_t above = 0;
    while (w[static_cast<std::size_t>(scratch[above])] > cutoff) ++above;
    std::size_t tied_end = above;
    while (tied_end < scratch.size() && w[static_cast<std::size_t>(scratch[tied_end])] == cutoff) ++tied_end;
    const std::size_t u = uniform_index(rng, r);
    if (u < above) return scratch[u];
    return scratch[above + uniform_index(rng, tied_end - above)];
  }
  std::vector<double> p(w.size());
  const double inv_t = 1.0 / cfg.temperature;
  for (std::size_t i = 0; i < w.size(); ++i) p[i] = w[i] > 0.0 ? std::pow(w[i], inv_t) : 0.0;
  const auto i = weighted_index(rng, p);
  return i == p.size() ? -1 : static_cast<int>(i);
}

}  // namespace

GeneratedMolecule generate_one(const GenerationIndex& index, const GenerationConfig& cfg, Rng& rng) {
  cfg.validate();
  GeneratedMolecule out;
  chem::Molecule& mol = out.molecule;
  std::deque<OpenSite> open;
  std::vector<int> instance_fragment;

  auto place = [&](int f, int skip_site) {
    const auto& frag = index.fragment(f);
    const auto& g = frag.graph();
    const int inst = static_cast<int>(instance_fragment.size());
    instance_fragment.push_back(f);
    out.fragment_keys.push_back(frag.key());
    std::vector<int> where(g.atom_count(), -1);
    for (std::size_t i = 0; i < g.atom_count(); ++i)
      if (!g.atom(static_cast<int>(i)).is_wildcard()) where[i] = mol.add_atom(g.atom(static_cast<int>(i)));
    for (const auto& b : g.bonds()) {
      const int a = where[static_cast<std::size_t>(b.begin)];
      const int c = where[static_cast<std::size_t>(b.end)];
      if (a >= 0 && c >= 0) mol.add_bond(a, c, b.order);
    }
    for (int s = 0; s < frag.site_count(); ++s) {
      const auto& site = frag.sites()[static_cast<std::size_t>(s)];
      if (s == skip_site) continue;
      open.push_back({inst, s, where[static_cast<std::size_t>(site.host)], site.order});
    }
    return std::pair{inst, std::move(where)};
  };
  auto cap = [&](const OpenSite& o) {
    mol.atom(o.host_atom).implicit_h += chem::bond_valence(o.order);
    ++out.capped_sites;
  };

  const auto& seeds = index.seed_weights();
  std::size_t seed = weighted_index(rng, seeds);
  if (seed == seeds.size()) seed = uniform_index(rng, seeds.size());
  place(static_cast<int>(seed), -1);
  out.seed_fragment = index.fragment(static_cast<int>(seed)).key();

  std::vector<int> cand_slots;
  std::vector<double> cand_weights;
  std::vector<int> scratch;
  while (!open.empty()) {
    const OpenSite o = open.front();
    open.pop_front();
    if (static_cast<int>(instance_fragment.size()) >= cfg.max_fragments) {
      cap(o);
      continue;
    }
    const int from_slot = index.slot_of(instance_fragment[static_cast<std::size_t>(o.instance)], o.site);
    index.candidates(from_slot, cand_slots, cand_weights);
    const int pick = choose(cfg, cand_weights, rng, scratch);
    if (pick < 0) {
      ++out.dead_ends;
      cap(o);
      continue;
    }
    const auto& to = index.slots()[static_cast<std::size_t>(cand_slots[static_cast<std::size_t>(pick)])];
    const auto& partner = index.fragment(to.fragment);
    auto [inst, where] = place(to.fragment, to.site);
    const int host = where[static_cast<std::size_t>(partner.sites()[static_cast<std::size_t>(to.site)].host)];
    mol.add_bond(o.host_atom, host, o.order);
    out.links.push_back({o.instance, o.site, inst, to.site});
    out.connections_used.push_back(qlearn::ConnectionKey::make(
        out.fragment_keys[static_cast<std::size_t>(o.instance)], o.site, partner.key(), to.site));
  }
  out.fragment_count = static_cast<int>(instance_fragment.size());
  mol.refresh_rings();
  // An invalid assembly is a construction bug, not data to filter.
  if (!chem::is_valence_valid(mol)) throw std::logic_error("generator assembled a valence-invalid molecule");
  out.smiles = chem::write_canonical(mol);
  return out;
}

GeneratedMolecule generate_item(const GenerationIndex& index, const GenerationConfig& cfg, std::uint64_t i) {
  Rng rng(derive_seed(cfg.rng_seed, 0x67656eULL, i));
  return generate_one(index, cfg, rng);
}

std::vector<GeneratedMolecule> generate_batch_serial(const GenerationIndex& index, const GenerationConfig& cfg) {
  cfg.validate();
  std::vector<GeneratedMolecule> out;
  out.reserve(cfg.batch_size);
  for (std::size_t i = 0; i < cfg.batch_size; ++i) out.push_back(generate_item(index, cfg, i));
  return out;
}

std::vector<GeneratedMolecule> generate_batch(const GenerationIndex& index, const GenerationConfig& cfg) {
  cfg.validate();
  std::vector<GeneratedMolecule> out(cfg.batch_size);
  std::exception_ptr failure;
  const auto n = static_cast<long>(cfg.batch_size);
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = generate_item(index, cfg, static_cast<std::uint64_t>(i));
    } catch (...) {
#pragma omp critical(fragmenta_generate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<GeneratedMolecule> generate_batch(const qlearn::QTable& q, const frag::Vocabulary& vocab,
                                              const GenerationConfig& cfg) {
  return generate_batch(GenerationIndex(q, vocab, cfg.epsilon_floor), cfg);
}

}  // namespace fragmenta::gen
