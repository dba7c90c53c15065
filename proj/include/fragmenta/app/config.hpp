#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "fragmenta/frag/decompose.hpp"
#include "fragmenta/gen/generator.hpp"
#include "fragmenta/obj/objective.hpp"
#include "fragmenta/qlearn/qtable.hpp"
#include "fragmenta/qlearn/rewards.hpp"
#include "fragmenta/tuning/chemist.hpp"
#include "fragmenta/tuning/session.hpp"
#include "json.hpp"

namespace fragmenta::app {

/// Invalid or inconsistent configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DataConfig {
  std::string train;
  std::string membership;  // optional pattern file
};

struct TrainingConfig {
  int epochs = 50;
  std::size_t minibatch = 256;  // whole dataset when it is no larger than this
  std::size_t samples_per_epoch = 200;
  double reconstruction_reward = qlearn::kDefaultReconstructionReward;
};

struct ReasonerConfig {
  std::string kind = "keyword";  // keyword | http | none
  std::string url;
  std::string token_env = "FRAGMENTA_REASONER_TOKEN";
  int timeout_ms = 5000;
};

struct TuningConfig {
  tuning::Mode mode = tuning::Mode::AgentAgent;
  double approval_threshold = 0.5;
  std::size_t round_samples = 10000;
  std::size_t top_n = 100;
  int epochs_per_round = 5;
  tuning::ChemistPersona persona;
  ReasonerConfig reasoner;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
};

/// Every section of a run configuration. Paths are resolved against the
/// directory of the file they were read from.
struct RunConfig {
  std::uint64_t seed = 0;
  DataConfig data;
  frag::DecompositionConfig decomposition;
  qlearn::QParams qlearn;
  TrainingConfig training;
  gen::GenerationConfig generation;
  obj::ObjectiveSpec objective = obj::internal_objective();
  TuningConfig tuning;
  ServeConfig serve;
  double sa_threshold = 6.0;

  void validate() const;
  /// Digest over the settings that affect training results.
  std::string digest() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Missing sections keep their defaults. Unknown keys are rejected so typos
/// surface. Throws ConfigError.
RunConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = {});
RunConfig load_config(const std::string& path);

std::shared_ptr<const tuning::Reasoner> make_reasoner(const ReasonerConfig& c);

}  // namespace fragmenta::app
