#include "fragmenta/app/training.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "fragmenta/chem/properties.hpp"
#include "fragmenta/frag/decompose.hpp"
#include "fragmenta/obj/objective.hpp"
#include "fragmenta/parallel/kernels.hpp"
#include "fragmenta/qlearn/rewards.hpp"
#include "fragmenta/util/digest.hpp"
#include "fragmenta/util/rng.hpp"

namespace fragmenta::app {

using nlohmann::json;
namespace fs = std::filesystem;

json to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},
          {"batch_molecules", m.batch_molecules},
          {"vocab_size", m.vocab_size},
          {"q_entries", m.q_entries},
          {"mean_q", m.mean_q},
          {"samples", m.samples},
          {"unique_samples", m.unique_samples},
          {"mean_individual", m.mean_individual},
          {"mean_group", m.mean_group},
          {"mean_mw", m.mean_mw}};
}

EpochMetrics epoch_metrics_from_json(const json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<int>();
  m.batch_molecules = j.at("batch_molecules").get<std::size_t>();
  m.vocab_size = j.at("vocab_size").get<std::size_t>();
  m.q_entries = j.at("q_entries").get<std::size_t>();
  m.mean_q = j.at("mean_q").get<double>();
  m.samples = j.at("samples").get<std::size_t>();
  m.unique_samples = j.at("unique_samples").get<std::size_t>();
  m.mean_individual = j.at("mean_individual").get<double>();
  m.mean_group = j.at("mean_group").get<double>();
  m.mean_mw = j.at("mean_mw").get<double>();
  return m;
}

std::string metrics_csv_header() {
  return "epoch,batch_molecules,vocab_size,q_entries,mean_q,samples,unique_samples,mean_individual,mean_group,mean_mw";
}

std::string metrics_csv_row(const EpochMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%zu,%zu,%zu,%.6f,%zu,%zu,%.6f,%.6f,%.3f", m.epoch, m.batch_molecules,
                m.vocab_size, m.q_entries, m.mean_q, m.samples, m.unique_samples, m.mean_individual, m.mean_group,
                m.mean_mw);
  return buf;
}

RunState RunState::fresh(const RunConfig& config) {
  RunState s;
  s.config_digest = config.digest();
  s.seed = config.seed;
  s.q = qlearn::QTable(config.qlearn);
  s.objective = config.objective;
  return s;
}

json RunState::to_json() const {
  json metrics_json = json::array();
  for (const auto& m : metrics) metrics_json.push_back(app::to_json(m));
  return {{"version", 1},
          {"config_digest", config_digest},
          {"seed", seed},
          {"epoch", epoch},
          {"vocabulary", vocab.to_json()},
          {"objective", obj::to_json(objective)},
          {"metrics", std::move(metrics_json)}};
}

std::string RunState::digest() const {
  json j = to_json();
  j["qtable"] = q.to_json();
  return hex_digest(j.dump());
}

void RunState::persist(const std::string& run_dir) const {
  fs::create_directories(run_dir);
  q.persist((fs::path(run_dir) / "qtable.json").string());
  const auto path = fs::path(run_dir) / "state.json";
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << to_json().dump(1) << '\n';
  }
  fs::rename(tmp, path);
  std::ofstream csv(fs::path(run_dir) / "metrics.csv");
  csv << metrics_csv_header() << '\n';
  for (const auto& m : metrics) csv << metrics_csv_row(m) << '\n';
}

RunState RunState::restore(const std::string& run_dir) {
  std::ifstream in(fs::path(run_dir) / "state.json");
  if (!in) throw std::runtime_error("no run state in " + run_dir);
  const json j = json::parse(in);
  if (j.value("version", 0) != 1) throw std::runtime_error("run state format version mismatch");
  RunState s;
  s.config_digest = j.at("config_digest").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.epoch = j.at("epoch").get<int>();
  s.vocab = frag::Vocabulary::from_json(j.at("vocabulary"));
  s.objective = obj::spec_from_json(j.at("objective"));
  for (const auto& m : j.at("metrics")) s.metrics.push_back(epoch_metrics_from_json(m));
  s.q = qlearn::QTable::restore((fs::path(run_dir) / "qtable.json").string());
  return s;
}

std::vector<std::size_t> epoch_batch(std::size_t n, const RunConfig& config, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= config.training.minibatch) return idx;
  Rng rng(derive_seed(seed, kStreamBatch, static_cast<std::uint64_t>(epoch)));
  const std::size_t k = config.training.minibatch;
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

gen::GenerationConfig generation_config(const RunConfig& config, std::uint64_t seed, std::uint64_t tag,
                                        std::uint64_t counter, std::size_t batch_size) {
  gen::GenerationConfig g = config.generation;
  g.rng_seed = derive_seed(seed, tag, counter);
  g.batch_size = batch_size;
  return g;
}

void train_epoch(RunState& state, std::span<const chem::Molecule> dataset, const RunConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("train_epoch: empty dataset");
  const auto epoch = static_cast<std::uint64_t>(state.epoch);
  const auto batch = epoch_batch(dataset.size(), config, state.seed, state.epoch);

  // (1-2) decompose against the table as it stood at the start of the epoch.
  std::vector<frag::Decomposition> decomps(batch.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < batch.size(); ++i) {
    frag::DecompositionConfig dc = config.decomposition;
    dc.rng_seed = derive_seed(state.seed, kStreamDecompose, epoch, batch[i]);
    decomps[i] = frag::decompose(dataset[batch[i]], state.q, dc);
  }
  // (3) novel fragments into vocabulary and table.
  for (const auto& d : decomps) state.vocab.add(d);
  qlearn::insert_fragments(state.q, state.vocab);
  // (4) reconstruction rewards.
  for (const auto& d : decomps) qlearn::reward_reconstruction(state.q, d, config.training.reconstruction_reward);

  // (5) sample, score, distribute.
  EpochMetrics m;
  m.epoch = state.epoch + 1;
  m.batch_molecules = batch.size();
  const std::size_t n = config.training.samples_per_epoch;
  if (n > 0) {
    const gen::GenerationIndex index(state.q, state.vocab, config.generation.epsilon_floor);
    const auto samples = gen::generate_batch(index, generation_config(config, state.seed, kStreamEpochSamples, epoch, n));
    std::vector<chem::Molecule> mols;
    std::vector<std::vector<qlearn::ConnectionKey>> connections;
    std::unordered_set<std::string> distinct;
    for (const auto& s : samples) {
      mols.push_back(s.molecule);
      connections.push_back(s.connections_used);
      distinct.insert(s.smiles.str());
    }
    const obj::CompiledObjective objective(state.objective);
    std::vector<double> individual(mols.size()), mw(mols.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t i = 0; i < mols.size(); ++i) {
      individual[i] = objective.score_individual(mols[i]);
      mw[i] = chem::properties(mols[i]).mol_weight;
    }
    const auto group = obj::score_group(mols, state.objective);
    if (state.objective.total_lambda() > 0.0) qlearn::distribute_rewards(state.q, connections, individual, group);
    const double dn = static_cast<double>(mols.size());
    m.samples = mols.size();
    m.unique_samples = distinct.size();
    m.mean_individual = parallel::ordered_sum(individual) / dn;
    m.mean_group = parallel::ordered_sum(group) / dn;
    m.mean_mw = parallel::ordered_sum(mw) / dn;
  }
  m.vocab_size = state.vocab.size();
  m.q_entries = state.q.size();
  std::vector<double> qs;
  qs.reserve(state.q.size());
  for (const auto& [k, e] : state.q.entries()) qs.push_back(e.q);
  m.mean_q = qs.empty() ? 0.0 : parallel::ordered_sum(qs) / static_cast<double>(qs.size());
  state.metrics.push_back(m);
  ++state.epoch;
}

}  // namespace fragmenta::app
