#include "fragmenta/app/campaign.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/gen/rank.hpp"
#include "fragmenta/obj/providers.hpp"
#include "fragmenta/tuning/chemist.hpp"

namespace fragmenta::app {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(RoundStatus s) {
  switch (s) {
    case RoundStatus::Open: return "open";
    case RoundStatus::Closed: return "closed";
    case RoundStatus::Skipped: return "skipped";
  }
  return "?";
}

namespace {

RoundStatus round_status_from_string(const std::string& s) {
  if (s == "open") return RoundStatus::Open;
  if (s == "closed") return RoundStatus::Closed;
  if (s == "skipped") return RoundStatus::Skipped;
  throw std::invalid_argument("unknown round status " + s);
}

json properties_json(const chem::PropertyVector& p) {
  return {{"mol_weight", p.mol_weight},
          {"logp", p.logp},
          {"hbd", p.hbd},
          {"hba", p.hba},
          {"rotatable_bonds", p.rotatable_bonds},
          {"logp_incomplete", p.logp_incomplete}};
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

RunConfig absolute_paths(RunConfig c) {
  if (!c.data.train.empty()) c.data.train = fs::absolute(c.data.train).lexically_normal().string();
  if (!c.data.membership.empty()) c.data.membership = fs::absolute(c.data.membership).lexically_normal().string();
  return c;
}

tuning::SessionOptions session_options(const RunConfig& c) {
  tuning::SessionOptions o;
  o.mode = c.tuning.mode;
  o.approval_threshold = c.tuning.approval_threshold;
  return o;
}

}  // namespace

double Round::mean_top_mw(std::size_t n) const {
  n = std::min(n, top.size());
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += top[i].properties.mol_weight;
  return sum / static_cast<double>(n);
}

json to_json(const RoundMolecule& m) {
  return {{"rank", m.rank}, {"smiles", m.smiles}, {"score", m.score}, {"properties", properties_json(m.properties)},
          {"qed", m.qed},   {"sa", m.sa}};
}

json to_json(const Round& r, bool with_molecules) {
  json j{{"number", r.number},
         {"status", to_string(r.status)},
         {"mode", tuning::to_string(r.mode)},
         {"generated", r.generated},
         {"unique", r.unique},
         {"feedback_ids", r.feedback_ids},
         {"version_before", r.version_before},
         {"version_after", r.version_after},
         {"epoch_opened", r.epoch_opened},
         {"top_count", r.top.size()}};
  if (with_molecules) {
    json mols = json::array();
    for (const auto& m : r.top) mols.push_back(to_json(m));
    j["molecules"] = std::move(mols);
  }
  return j;
}

Round round_from_json(const json& j) {
  Round r;
  r.number = j.at("number").get<int>();
  r.status = round_status_from_string(j.at("status").get<std::string>());
  r.mode = tuning::mode_from_string(j.at("mode").get<std::string>());
  r.generated = j.at("generated").get<std::size_t>();
  r.unique = j.at("unique").get<std::size_t>();
  r.feedback_ids = j.at("feedback_ids").get<std::vector<std::string>>();
  r.version_before = j.at("version_before").get<int>();
  r.version_after = j.at("version_after").get<int>();
  r.epoch_opened = j.at("epoch_opened").get<int>();
  for (const auto& m : j.at("molecules")) {
    RoundMolecule rm;
    rm.rank = m.at("rank").get<int>();
    rm.smiles = m.at("smiles").get<std::string>();
    rm.score = m.at("score").get<double>();
    const auto& p = m.at("properties");
    rm.properties.mol_weight = p.at("mol_weight").get<double>();
    rm.properties.logp = p.at("logp").get<double>();
    rm.properties.hbd = p.at("hbd").get<int>();
    rm.properties.hba = p.at("hba").get<int>();
    rm.properties.rotatable_bonds = p.at("rotatable_bonds").get<int>();
    rm.properties.logp_incomplete = p.at("logp_incomplete").get<bool>();
    rm.qed = m.at("qed").get<double>();
    rm.sa = m.at("sa").get<double>();
    r.top.push_back(std::move(rm));
  }
  return r;
}

Campaign::Campaign(RunConfig config, std::string run_dir)
    : Campaign(config, std::move(run_dir), RunState::fresh(config), tuning::KnowledgeBase(config.objective), {}) {}

Campaign::Campaign(RunConfig config, std::string run_dir, RunState state, tuning::KnowledgeBase kb,
                   std::vector<Round> rounds)
    : config_(absolute_paths(std::move(config))), run_dir_(std::move(run_dir)), state_(std::move(state)),
      rounds_(std::move(rounds)) {
  config_.validate();
  dataset_ = chem::load_molecules(config_.data.train);
  if (dataset_.empty()) throw ConfigError("training set " + config_.data.train + " is empty");
  if (!run_dir_.empty()) {
    fs::create_directories(run_dir_);
    events_ = std::make_unique<tuning::EventLog>((fs::path(run_dir_) / "events.jsonl").string());
  } else {
    events_ = std::make_unique<tuning::EventLog>();
  }
  session_ = std::make_unique<tuning::TuningSession>(std::move(kb), session_options(config_),
                                                     make_reasoner(config_.tuning.reasoner), events_.get());
  state_.objective = session_->spec();
}

Campaign Campaign::restore(const std::string& run_dir) {
  RunConfig config = config_from_json(read_json(fs::path(run_dir) / "config.json"));
  RunState state = RunState::restore(run_dir);
  if (state.config_digest != config.digest()) throw ConfigError("run state does not match config.json");
  auto kb = tuning::KnowledgeBase::restore((fs::path(run_dir) / "kb.json").string());
  std::vector<Round> rounds;
  if (fs::exists(fs::path(run_dir) / "rounds.json"))
    for (const auto& r : read_json(fs::path(run_dir) / "rounds.json")) rounds.push_back(round_from_json(r));
  return Campaign(std::move(config), run_dir, std::move(state), std::move(kb), std::move(rounds));
}

const Round* Campaign::current_round() const { return rounds_.empty() ? nullptr : &rounds_.back(); }

const Round& Campaign::round(int number) const {
  if (number < 1 || number > static_cast<int>(rounds_.size()))
    throw UnknownRound("no round " + std::to_string(number));
  return rounds_[static_cast<std::size_t>(number - 1)];
}

Round& Campaign::mutable_round(int number) { return const_cast<Round&>(round(number)); }

void Campaign::train(int epochs) {
  for (int e = 0; e < epochs; ++e) train_epoch(state_, dataset_, config_);
}

const Round& Campaign::open_round() {
  if (!rounds_.empty() && rounds_.back().status == RoundStatus::Open)
    throw RoundAlreadyOpen("round " + std::to_string(rounds_.back().number) + " is still open");
  if (state_.vocab.empty()) throw std::logic_error("open_round: the model has not been trained");
  Round r;
  r.number = static_cast<int>(rounds_.size()) + 1;
  r.mode = config_.tuning.mode;
  r.version_before = session_->spec().version;
  r.version_after = r.version_before;
  r.epoch_opened = state_.epoch;

  const gen::GenerationIndex index(state_.q, state_.vocab, config_.generation.epsilon_floor);
  const auto gcfg = generation_config(config_, state_.seed, kStreamRound, static_cast<std::uint64_t>(r.number),
                                      config_.tuning.round_samples);
  const auto batch = gen::generate_batch(index, gcfg);
  std::vector<gen::GeneratedMolecule> distinct;
  std::unordered_set<std::string> seen;
  for (const auto& g : batch)
    if (seen.insert(g.smiles.str()).second) distinct.push_back(g);
  r.generated = batch.size();
  r.unique = distinct.size();
  const auto ranked = gen::rank_outputs(distinct, session_->spec(), std::min(config_.tuning.top_n, distinct.size()));
  const auto& provider = obj::default_provider();
  for (const auto& rm : ranked) {
    RoundMolecule m;
    m.rank = rm.rank;
    m.smiles = rm.item.smiles.str();
    m.score = rm.score;
    m.properties = chem::properties(rm.item.molecule);
    m.qed = provider.qed(rm.item.molecule);
    m.sa = provider.sa(rm.item.molecule);
    r.top.push_back(std::move(m));
  }

  if (!run_dir_.empty()) {
    const auto dir = fs::path(run_dir_) / "rounds" / std::to_string(r.number);
    std::string smi;
    json items = json::array();
    const obj::CompiledObjective objective(session_->spec());
    for (const auto& g : batch) {
      smi += g.smiles.str() + '\n';
      json keys = json::array();
      for (const auto& k : g.connections_used) keys.push_back(json::array({k.a, k.site_a, k.b, k.site_b}));
      items.push_back({{"smiles", g.smiles.str()}, {"connections_used", std::move(keys)},
                       {"score", objective.score_individual(g.molecule)}});
    }
    write_text(dir / "batch.smi", smi);
    write_text(dir / "batch.json",
               json{{"seed", gcfg.rng_seed}, {"strategy", gen::to_string(gcfg.strategy)}, {"molecules", std::move(items)}}
                   .dump() + "\n");
    json top = json::array();
    for (const auto& m : r.top) top.push_back(to_json(m));
    write_text(dir / "top.json", top.dump(1) + "\n");
  }

  rounds_.push_back(std::move(r));
  Round& open = rounds_.back();
  if (open.mode == tuning::Mode::AgentAgent) {
    std::vector<chem::Molecule> reviewed;
    for (const auto& rm : ranked) reviewed.push_back(rm.item.molecule);
    const auto fb = tuning::simulated_chemist(reviewed, session_->kb(), session_->spec(), open.number,
                                              config_.tuning.persona);
    const auto outcome = session_->submit(fb);
    close_round(open, outcome, fb.id);
  }
  persist();
  return rounds_.back();
}

void Campaign::close_round(Round& r, const tuning::TuningOutcome&, const std::string& feedback_id) {
  r.feedback_ids.push_back(feedback_id);
  r.status = RoundStatus::Closed;
  after_objective_change();
  r.version_after = session_->spec().version;
  train(config_.tuning.epochs_per_round);
}

void Campaign::after_objective_change() { state_.objective = session_->spec(); }

tuning::TuningOutcome Campaign::submit_feedback(int number, const tuning::FeedbackRecord& f) {
  Round& r = mutable_round(number);
  if (r.status != RoundStatus::Open) throw RoundClosed("round " + std::to_string(number) + " is " + to_string(r.status));
  tuning::FeedbackRecord record = f;
  record.round = number;
  const auto outcome = session_->submit(record);
  if (outcome.resolved) {
    close_round(r, outcome, record.id);
  } else if (std::find(r.feedback_ids.begin(), r.feedback_ids.end(), record.id) == r.feedback_ids.end()) {
    r.feedback_ids.push_back(record.id);
  }
  persist();
  return outcome;
}

const obj::ObjectiveSpec& Campaign::operator_edit(int number, obj::ObjectiveSpec edited) {
  if (config_.tuning.mode != tuning::Mode::HumanHuman)
    throw std::logic_error("operator edits need human-human mode");
  Round& r = mutable_round(number);
  if (r.status != RoundStatus::Open) throw RoundClosed("round " + std::to_string(number) + " is " + to_string(r.status));
  session_->operator_edit(std::move(edited));
  close_round(r, {}, "operator-edit-v" + std::to_string(session_->spec().version));
  persist();
  return session_->spec();
}

void Campaign::skip_round(int number) {
  Round& r = mutable_round(number);
  if (r.status != RoundStatus::Open) throw RoundClosed("round " + std::to_string(number) + " is " + to_string(r.status));
  r.status = RoundStatus::Skipped;
  persist();
}

tuning::TuningOutcome Campaign::approve_pending(bool approve) {
  tuning::TuningOutcome out;
  if (approve) {
    out = session_->approve_pending();
  } else {
    out.version_before = out.version_after = session_->spec().version;
    session_->reject_pending();
  }
  after_objective_change();
  persist();
  return out;
}

void Campaign::run_agent_rounds(int rounds) {
  if (config_.tuning.mode != tuning::Mode::AgentAgent)
    throw std::logic_error("run_agent_rounds needs agent-agent mode");
  for (int i = 0; i < rounds; ++i) open_round();
}

void Campaign::persist() const {
  if (run_dir_.empty()) return;
  const fs::path dir(run_dir_);
  write_text(dir / "config.json", to_json(config_).dump(2) + "\n");
  state_.persist(run_dir_);
  session_->kb().persist((dir / "kb.json").string());
  json rounds = json::array();
  for (const auto& r : rounds_) rounds.push_back(to_json(r));
  write_text(dir / "rounds.json", rounds.dump(1) + "\n");
}

}  // namespace fragmenta::app
