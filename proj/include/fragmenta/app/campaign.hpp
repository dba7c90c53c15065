#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fragmenta/app/config.hpp"
#include "fragmenta/app/training.hpp"
#include "fragmenta/chem/properties.hpp"
#include "fragmenta/tuning/session.hpp"
#include "json.hpp"

namespace fragmenta::app {

class RoundAlreadyOpen : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};
class UnknownRound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};
class RoundClosed : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class RoundStatus { Open, Closed, Skipped };
std::string to_string(RoundStatus s);

struct RoundMolecule {
  int rank = 0;
  std::string smiles;
  double score = 0.0;
  chem::PropertyVector properties;
  double qed = 0.0;
  double sa = 0.0;
};

struct Round {
  int number = 0;  // 1-based
  RoundStatus status = RoundStatus::Open;
  tuning::Mode mode = tuning::Mode::AgentAgent;
  std::size_t generated = 0;
  std::size_t unique = 0;
  std::vector<RoundMolecule> top;
  std::vector<std::string> feedback_ids;
  int version_before = 0;
  int version_after = 0;
  int epoch_opened = 0;
  double mean_top_mw(std::size_t n) const;
};

nlohmann::json to_json(const RoundMolecule& m);
nlohmann::json to_json(const Round& r, bool with_molecules = true);
Round round_from_json(const nlohmann::json& j);

/// One optimization campaign: dataset, training state, tuning session and
/// rounds, optionally persisted under run_dir as
///   config.json state.json qtable.json kb.json rounds.json metrics.csv
///   events.jsonl rounds/N/{batch.smi, batch.json, top.json}
class Campaign {
 public:
  /// Loads the dataset named by config.data.train. Empty run_dir keeps
  /// everything in memory.
  Campaign(RunConfig config, std::string run_dir = {});
  /// Reopens a persisted campaign; config comes from run_dir/config.json.
  static Campaign restore(const std::string& run_dir);

  const RunConfig& config() const noexcept { return config_; }
  const RunState& state() const noexcept { return state_; }
  const tuning::TuningSession& session() const noexcept { return *session_; }
  tuning::TuningSession& session() noexcept { return *session_; }
  const std::vector<Round>& rounds() const noexcept { return rounds_; }
  const std::vector<chem::Molecule>& dataset() const noexcept { return dataset_; }
  const tuning::EventLog& events() const noexcept { return *events_; }
  const std::string& run_dir() const noexcept { return run_dir_; }
  const Round* current_round() const;
  const Round& round(int number) const;  // throws UnknownRound

  void train(int epochs);

  /// Generates config.tuning.round_samples molecules, ranks the distinct ones
  /// and keeps the top config.tuning.top_n. In agent-agent mode the simulated
  /// chemist reviews the result at once and the round closes; otherwise it
  /// stays open for feedback. Throws RoundAlreadyOpen.
  const Round& open_round();

  /// Throws UnknownRound, RoundClosed, tuning::SchemaViolation.
  tuning::TuningOutcome submit_feedback(int round, const tuning::FeedbackRecord& f);
  /// Human-human mode: the operator's spec replaces the objective verbatim
  /// and closes the round. Throws UnknownRound, RoundClosed, std::logic_error
  /// in other modes.
  const obj::ObjectiveSpec& operator_edit(int round, obj::ObjectiveSpec edited);
  void skip_round(int round);
  tuning::TuningOutcome approve_pending(bool approve);

  /// open_round repeated `rounds` times in agent-agent mode.
  void run_agent_rounds(int rounds);

  void persist() const;

 private:
  RunConfig config_;
  std::string run_dir_;
  std::vector<chem::Molecule> dataset_;
  RunState state_;
  std::unique_ptr<tuning::EventLog> events_;
  std::unique_ptr<tuning::TuningSession> session_;
  std::vector<Round> rounds_;

  Campaign(RunConfig config, std::string run_dir, RunState state, tuning::KnowledgeBase kb, std::vector<Round> rounds);
  void close_round(Round& r, const tuning::TuningOutcome& outcome, const std::string& feedback_id);
  void after_objective_change();
  Round& mutable_round(int number);
};

}  // namespace fragmenta::app
