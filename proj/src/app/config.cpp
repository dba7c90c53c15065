#include "fragmenta/app/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "fragmenta/util/digest.hpp"

namespace fragmenta::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void only_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("[" + section + "] must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError("unknown key '" + k + "' in [" + section + "]");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("[" + section + "] " + key + " has the wrong type");
  }
}

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

}  // namespace

void RunConfig::validate() const {
  if (data.train.empty()) throw ConfigError("[data] train is required");
  if (decomposition.k < 1) throw ConfigError("[decomposition] k must be >= 1");
  if (decomposition.max_cuts < 0) throw ConfigError("[decomposition] max_cuts must be >= 0");
  if (!(decomposition.explore_prob >= 0.0 && decomposition.explore_prob <= 1.0))
    throw ConfigError("[decomposition] explore_prob must lie in [0, 1]");
  if (!(qlearn.alpha > 0.0 && qlearn.alpha <= 1.0)) throw ConfigError("[qlearn] alpha must lie in (0, 1]");
  if (!(qlearn.epsilon > 0.0)) throw ConfigError("[qlearn] epsilon must be > 0");
  if (training.epochs < 0) throw ConfigError("[training] epochs must be >= 0");
  if (training.minibatch < 1) throw ConfigError("[training] minibatch must be >= 1");
  try {
    generation.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[generation] ") + e.what());
  }
  if (tuning.top_n < 1 || tuning.round_samples < tuning.top_n)
    throw ConfigError("[tuning] need 1 <= top_n <= round_samples");
  if (tuning.epochs_per_round < 0) throw ConfigError("[tuning] epochs_per_round must be >= 0");
  if (serve.port < 0 || serve.port > 65535) throw ConfigError("[serve] port out of range");
}

json to_json(const RunConfig& c) {
  json persona = tuning::to_json(c.tuning.persona);
  return {
      {"seed", c.seed},
      {"data", {{"train", c.data.train}, {"membership", c.data.membership}}},
      {"decomposition",
       {{"k", c.decomposition.k},
        {"max_cuts", c.decomposition.max_cuts},
        {"explore_prob", c.decomposition.explore_prob},
        {"score", c.decomposition.score == frag::DecompositionScore::Sum ? "sum" : "mean"}}},
      {"qlearn",
       {{"epsilon", c.qlearn.epsilon}, {"alpha", c.qlearn.alpha}, {"mode", c.qlearn.raw_sum ? "raw_sum" : "ema"}}},
      {"training",
       {{"epochs", c.training.epochs},
        {"minibatch", c.training.minibatch},
        {"samples_per_epoch", c.training.samples_per_epoch},
        {"reconstruction_reward", c.training.reconstruction_reward}}},
      {"generation",
       {{"strategy", gen::to_string(c.generation.strategy)},
        {"top_r", c.generation.top_r},
        {"temperature", c.generation.temperature},
        {"max_fragments", c.generation.max_fragments},
        {"batch_size", c.generation.batch_size},
        {"epsilon_floor", c.generation.epsilon_floor}}},
      {"objective", obj::to_json(c.objective)},
      {"tuning",
       {{"mode", tuning::to_string(c.tuning.mode)},
        {"approval_threshold", c.tuning.approval_threshold},
        {"round_samples", c.tuning.round_samples},
        {"top_n", c.tuning.top_n},
        {"epochs_per_round", c.tuning.epochs_per_round},
        {"persona", persona},
        {"reasoner",
         {{"kind", c.tuning.reasoner.kind},
          {"url", c.tuning.reasoner.url},
          {"token_env", c.tuning.reasoner.token_env},
          {"timeout_ms", c.tuning.reasoner.timeout_ms}}}}},
      {"serve", {{"host", c.serve.host}, {"port", c.serve.port}}},
      {"evaluation", {{"sa_threshold", c.sa_threshold}}},
  };
}

RunConfig config_from_json(const json& j, const std::string& base_dir) {
  RunConfig c;
  only_keys(j, "root",
            {"seed", "data", "decomposition", "qlearn", "training", "generation", "objective", "tuning", "serve",
             "evaluation"});
  read(j, "seed", c.seed, "root");
  if (j.contains("data")) {
    const auto& d = j["data"];
    only_keys(d, "data", {"train", "membership"});
    read(d, "train", c.data.train, "data");
    read(d, "membership", c.data.membership, "data");
    c.data.train = resolve(c.data.train, base_dir);
    c.data.membership = resolve(c.data.membership, base_dir);
  }
  if (j.contains("decomposition")) {
    const auto& d = j["decomposition"];
    only_keys(d, "decomposition", {"k", "max_cuts", "explore_prob", "score"});
    read(d, "k", c.decomposition.k, "decomposition");
    read(d, "max_cuts", c.decomposition.max_cuts, "decomposition");
    read(d, "explore_prob", c.decomposition.explore_prob, "decomposition");
    std::string score = "sum";
    read(d, "score", score, "decomposition");
    if (score == "sum") {
      c.decomposition.score = frag::DecompositionScore::Sum;
    } else if (score == "mean") {
      c.decomposition.score = frag::DecompositionScore::Mean;
    } else {
      throw ConfigError("[decomposition] score must be 'sum' or 'mean'");
    }
  }
  if (j.contains("qlearn")) {
    const auto& q = j["qlearn"];
    only_keys(q, "qlearn", {"epsilon", "alpha", "mode"});
    read(q, "epsilon", c.qlearn.epsilon, "qlearn");
    read(q, "alpha", c.qlearn.alpha, "qlearn");
    std::string mode = "ema";
    read(q, "mode", mode, "qlearn");
    if (mode != "ema" && mode != "raw_sum") throw ConfigError("[qlearn] mode must be 'ema' or 'raw_sum'");
    c.qlearn.raw_sum = mode == "raw_sum";
  }
  if (j.contains("training")) {
    const auto& t = j["training"];
    only_keys(t, "training", {"epochs", "minibatch", "samples_per_epoch", "reconstruction_reward"});
    read(t, "epochs", c.training.epochs, "training");
    read(t, "minibatch", c.training.minibatch, "training");
    read(t, "samples_per_epoch", c.training.samples_per_epoch, "training");
    read(t, "reconstruction_reward", c.training.reconstruction_reward, "training");
  }
  if (j.contains("generation")) {
    const auto& g = j["generation"];
    only_keys(g, "generation", {"strategy", "top_r", "temperature", "max_fragments", "batch_size", "epsilon_floor"});
    std::string strategy = gen::to_string(c.generation.strategy);
    read(g, "strategy", strategy, "generation");
    try {
      c.generation.strategy = gen::strategy_from_string(strategy);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[generation] ") + e.what());
    }
    read(g, "top_r", c.generation.top_r, "generation");
    read(g, "temperature", c.generation.temperature, "generation");
    read(g, "max_fragments", c.generation.max_fragments, "generation");
    read(g, "batch_size", c.generation.batch_size, "generation");
    read(g, "epsilon_floor", c.generation.epsilon_floor, "generation");
  }
  if (j.contains("objective")) {
    const auto& o = j["objective"];
    try {
      if (o.is_string()) {
        if (o.get<std::string>() == "internal") {
          c.objective = obj::internal_objective();
        } else if (o.get<std::string>() == "none") {
          c.objective = obj::ObjectiveSpec{};
        } else {
          throw ConfigError("[objective] must be 'internal', 'none' or an objective object");
        }
      } else {
        c.objective = obj::spec_from_json(o);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("[objective] ") + e.what());
    }
  }
  if (j.contains("tuning")) {
    const auto& t = j["tuning"];
    only_keys(t, "tuning",
              {"mode", "approval_threshold", "round_samples", "top_n", "epochs_per_round", "persona", "reasoner"});
    if (t.contains("mode")) {
      try {
        c.tuning.mode = tuning::mode_from_string(t["mode"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("[tuning] ") + e.what());
      }
    }
    read(t, "approval_threshold", c.tuning.approval_threshold, "tuning");
    read(t, "round_samples", c.tuning.round_samples, "tuning");
    read(t, "top_n", c.tuning.top_n, "tuning");
    read(t, "epochs_per_round", c.tuning.epochs_per_round, "tuning");
    if (t.contains("persona")) {
      try {
        c.tuning.persona = tuning::persona_from_json(t["persona"]);
      } catch (const std::exception& e) {
        throw ConfigError(std::string("[tuning.persona] ") + e.what());
      }
    }
    if (t.contains("reasoner")) {
      const auto& r = t["reasoner"];
      only_keys(r, "tuning.reasoner", {"kind", "url", "token_env", "timeout_ms"});
      read(r, "kind", c.tuning.reasoner.kind, "tuning.reasoner");
      read(r, "url", c.tuning.reasoner.url, "tuning.reasoner");
      read(r, "token_env", c.tuning.reasoner.token_env, "tuning.reasoner");
      read(r, "timeout_ms", c.tuning.reasoner.timeout_ms, "tuning.reasoner");
    }
  }
  if (j.contains("serve")) {
    const auto& s = j["serve"];
    only_keys(s, "serve", {"host", "port"});
    read(s, "host", c.serve.host, "serve");
    read(s, "port", c.serve.port, "serve");
  }
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    only_keys(e, "evaluation", {"sa_threshold"});
    read(e, "sa_threshold", c.sa_threshold, "evaluation");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, fs::path(path).parent_path().string());
}

std::string RunConfig::digest() const {
  json j = to_json(*this);
  // Neither where results are served nor how rounds are tuned changes training.
  j.erase("serve");
  j.erase("tuning");
  j.erase("evaluation");
  j["data"].erase("membership");
  return hex_digest(j.dump());
}

std::shared_ptr<const tuning::Reasoner> make_reasoner(const ReasonerConfig& c) {
  if (c.kind == "none") return nullptr;
  if (c.kind == "keyword") return std::make_shared<tuning::KeywordReasoner>();
  if (c.kind == "http")
    return std::make_shared<tuning::HttpReasoner>(
        tuning::HttpReasoner::Options{c.url, c.token_env, std::chrono::milliseconds(c.timeout_ms)});
  throw ConfigError("[tuning.reasoner] kind must be keyword, http or none");
}

}  // namespace fragmenta::app
