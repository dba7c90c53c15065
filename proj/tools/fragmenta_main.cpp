// fragmenta command-line tool. Exit codes: 0 success, 1 domain error, 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fragmenta/app/campaign.hpp"
#include "fragmenta/app/server.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/obj/metrics.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fragmenta;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string run_dir = "run";
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

void write_file(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// "--set section.key=value": value is JSON when it parses, else a string.
void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--set " + assignment + ": expected key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &j;
  std::stringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) parts.push_back(key);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]) || !(*node)[parts[i]].is_object()) (*node)[parts[i]] = json::object();
    node = &(*node)[parts[i]];
  }
  (*node)[parts.back()] = value;
}

// Config file (optional) + --set overrides + the command's own flags, which are
// applied last through `patch`.
app::RunConfig build_config(const Common& c, const std::function<void(json&)>& patch = {}) {
  json j = app::to_json(app::RunConfig{});
  std::string base_dir;
  if (!c.config.empty()) {
    j = read_json_file(c.config);
    base_dir = fs::absolute(c.config).parent_path().string();
  }
  for (const auto& o : c.overrides) apply_override(j, o);
  if (c.seed) j["seed"] = *c.seed;
  if (patch) patch(j);
  return app::config_from_json(j, base_dir);
}

bool has_run(const std::string& dir) { return fs::exists(fs::path(dir) / "state.json"); }

void print_round(const app::Round& r, std::size_t show) {
  std::cout << "round " << r.number << " [" << app::to_string(r.status) << "] generated " << r.generated << ", unique "
            << r.unique << ", objective v" << r.version_before << " -> v" << r.version_after << ", top-50 mean MW "
            << r.mean_top_mw(50) << "\n";
  for (std::size_t i = 0; i < std::min(show, r.top.size()); ++i) {
    const auto& m = r.top[i];
    std::cout << "  " << m.rank << "\t" << m.score << "\t" << m.properties.mol_weight << "\t" << m.smiles << "\n";
  }
}

// --- commands ------------------------------------------------------------------

int cmd_train(const Common& c, const std::string& data, int epochs, bool resume) {
  if (resume) {
    auto campaign = app::Campaign::restore(c.run_dir);
    const int n = epochs > 0 ? epochs : campaign.config().training.epochs;
    campaign.train(n);
    campaign.persist();
    std::cout << "resumed to epoch " << campaign.state().epoch << ", state " << campaign.state().digest() << "\n";
    return 0;
  }
  if (has_run(c.run_dir)) throw std::runtime_error(c.run_dir + " already holds a run; pass --resume or another --run-dir");
  auto config = build_config(c, [&](json& j) {
    if (!data.empty()) j["data"]["train"] = fs::absolute(data).string();
    if (epochs > 0) j["training"]["epochs"] = epochs;
  });
  if (config.data.train.empty()) throw UsageError("--data: no training set given (flag or [data] train)");
  app::Campaign campaign(config, c.run_dir);
  campaign.train(config.training.epochs);
  campaign.persist();
  const auto& last = campaign.state().metrics.back();
  std::cout << "trained " << campaign.state().epoch << " epochs on " << campaign.dataset().size() << " molecules: vocab "
            << campaign.state().vocab.size() << ", q entries " << campaign.state().q.size() << ", last mean score "
            << last.mean_individual << "\nstate " << campaign.state().digest() << " in " << c.run_dir << "\n";
  return 0;
}

int cmd_generate(const Common& c, std::size_t n, const std::string& out, const std::string& strategy) {
  auto campaign = app::Campaign::restore(c.run_dir);
  auto config = campaign.config();
  if (!strategy.empty()) config.generation.strategy = gen::strategy_from_string(strategy);
  const std::uint64_t seed = c.seed.value_or(config.seed);
  const auto g = app::generation_config(config, seed, app::kStreamGenerate, 0, n);
  const auto batch = gen::generate_batch(campaign.state().q, campaign.state().vocab, g);
  std::ostringstream text;
  for (const auto& m : batch) text << m.smiles.str() << "\n";
  if (out.empty() || out == "-") {
    std::cout << text.str();
  } else {
    write_file(out, text.str());
    std::cerr << "wrote " << batch.size() << " molecules to " << out << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& generated, const std::string& train, const std::string& membership,
                 const std::string& label, const std::string& json_out, double sa_threshold) {
  std::vector<std::string> smiles;
  for (const auto& rec : chem::read_smiles_file(generated)) smiles.push_back(rec.text);
  const auto training = chem::load_molecules(train);
  std::optional<obj::MembershipPattern> pattern;
  if (!membership.empty()) pattern = obj::MembershipPattern::load(membership);
  obj::EvaluationOptions options;
  options.sa_threshold = sa_threshold;
  const auto report = obj::evaluate(smiles, training, pattern ? &*pattern : nullptr, obj::default_provider(), options);
  std::cout << obj::render_table(label, report);
  if (!json_out.empty()) write_file(json_out, obj::to_json(report).dump(2) + "\n");
  return 0;
}

struct RoundArgs {
  std::string mode;
  int rounds = 1;
  int number = 0;
  std::string feedback;
  std::string edit;
  bool approve = false;
  bool reject = false;
  bool skip = false;
  std::size_t show = 10;
};

int cmd_round(const Common& c, const RoundArgs& a) {
  std::optional<app::Campaign> campaign;
  if (has_run(c.run_dir)) {
    if (!c.config.empty() || !c.overrides.empty())
      std::cerr << "note: " << c.run_dir << " exists; its config.json is used\n";
    campaign.emplace(app::Campaign::restore(c.run_dir));
    if (!a.mode.empty() && tuning::mode_from_string(a.mode) != campaign->config().tuning.mode)
      throw UsageError("--mode " + a.mode + ": the run was started in " + tuning::to_string(campaign->config().tuning.mode));
  } else {
    auto config = build_config(c, [&](json& j) {
      if (!a.mode.empty()) j["tuning"]["mode"] = a.mode;
    });
    if (config.data.train.empty()) throw UsageError("--config: no training set given ([data] train)");
    campaign.emplace(config, c.run_dir);
    campaign->train(config.training.epochs);
    campaign->persist();
  }
  auto& cp = *campaign;
  const auto target = [&]() {
    if (a.number > 0) return a.number;
    if (!cp.current_round()) throw UsageError("--round: no round has been opened");
    return cp.current_round()->number;
  };

  if (a.approve || a.reject) {
    std::cout << tuning::to_json(cp.approve_pending(a.approve)).dump(2) << "\n";
    return 0;
  }
  if (a.skip) {
    cp.skip_round(target());
    print_round(cp.round(target()), 0);
    return 0;
  }
  if (!a.feedback.empty()) {
    const auto outcome = cp.submit_feedback(target(), tuning::record_from_json(read_json_file(a.feedback)));
    std::cout << tuning::to_json(outcome).dump(2) << "\n";
    return 0;
  }
  if (!a.edit.empty()) {
    const auto& spec = cp.operator_edit(target(), obj::spec_from_json(read_json_file(a.edit)));
    std::cout << obj::to_json(spec).dump(2) << "\n";
    return 0;
  }
  const int n = cp.config().tuning.mode == tuning::Mode::AgentAgent ? a.rounds : 1;
  for (int i = 0; i < n; ++i) print_round(cp.open_round(), a.show);
  cp.persist();
  std::cout << "objective v" << cp.session().spec().version << ", history length " << cp.session().kb().history().size()
            << "\n";
  return 0;
}

int cmd_serve(const Common& c, const std::string& host, int port) {
  std::optional<app::Campaign> campaign;
  if (has_run(c.run_dir)) {
    campaign.emplace(app::Campaign::restore(c.run_dir));
  } else {
    const auto config = build_config(c);
    if (config.data.train.empty()) throw UsageError("--config: no training set given ([data] train)");
    campaign.emplace(config, c.run_dir);
    campaign->train(config.training.epochs);
    campaign->persist();
  }
  const std::string h = host.empty() ? campaign->config().serve.host : host;
  const int p = port > 0 ? port : campaign->config().serve.port;
  app::SessionService service(*campaign);
  std::cerr << "serving " << c.run_dir << " on http://" << h << ":" << p << "\n";
  if (!app::serve(service, h, p)) throw std::runtime_error("cannot listen on " + h + ":" + std::to_string(p));
  return 0;
}

int cmd_inspect_vocab(const Common& c, std::size_t top) {
  const auto state = app::RunState::restore(c.run_dir);
  std::vector<std::pair<std::size_t, std::string>> rows;
  for (const auto& [key, entry] : state.vocab.entries()) rows.emplace_back(entry.count, key);
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::cout << state.vocab.size() << " fragments, " << state.q.size() << " q entries, epoch " << state.epoch << "\n";
  for (std::size_t i = 0; i < rows.size() && (top == 0 || i < top); ++i)
    std::cout << rows[i].first << "\t" << rows[i].second << "\n";
  return 0;
}

int cmd_export_report(const Common& c, const std::string& out, std::size_t n) {
  auto campaign = app::Campaign::restore(c.run_dir);
  const auto& config = campaign.config();
  std::vector<chem::Molecule> generated;
  const auto g = app::generation_config(config, c.seed.value_or(config.seed), app::kStreamGenerate, 0, n);
  for (auto& m : gen::generate_batch(campaign.state().q, campaign.state().vocab, g)) generated.push_back(std::move(m.molecule));
  std::optional<obj::MembershipPattern> pattern;
  if (!config.data.membership.empty()) pattern = obj::MembershipPattern::load(config.data.membership);
  obj::EvaluationOptions options;
  options.sa_threshold = config.sa_threshold;
  const auto report =
      obj::evaluate(generated, campaign.dataset(), pattern ? &*pattern : nullptr, obj::default_provider(), options);

  json rounds = json::array();
  for (const auto& r : campaign.rounds()) rounds.push_back(app::to_json(r, false));
  json metrics = json::array();
  for (const auto& m : campaign.state().metrics) metrics.push_back(app::to_json(m));
  const json doc{{"config_digest", config.digest()},
                 {"state_digest", campaign.state().digest()},
                 {"epoch", campaign.state().epoch},
                 {"evaluation", obj::to_json(report)},
                 {"objective", obj::to_json(campaign.session().spec())},
                 {"history", campaign.session().kb().to_json().at("history")},
                 {"rounds", rounds},
                 {"metrics", metrics}};
  std::cout << obj::render_table(fs::path(c.run_dir).filename().string(), report);
  const std::string path = out.empty() ? (fs::path(c.run_dir) / "report.json").string() : out;
  write_file(path, doc.dump(2) + "\n");
  std::cerr << "wrote " << path << "\n";
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool with_config = true) {
  if (with_config) {
    sub->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--set", c.overrides, "Config override, e.g. --set generation.strategy=bal");
  }
  sub->add_option("--seed", c.seed, "Seed for every random stream");
  sub->add_option("--run-dir", c.run_dir, "Run directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fragmenta: fragment-based molecular generation with interactive objective tuning"};
  app.require_subcommand(1);
  Common c;

  std::string data;
  int epochs = 0;
  bool resume = false;
  auto* train = app.add_subcommand("train", "Train the fragment Q-table on a dataset");
  add_common(train, c);
  train->add_option("--data", data, "Training SMILES file")->check(CLI::ExistingFile);
  train->add_option("--epochs", epochs, "Epochs (default from config)")->check(CLI::PositiveNumber);
  train->add_flag("--resume", resume, "Continue the run in --run-dir");

  std::size_t count = 1000;
  std::string out, strategy;
  auto* generate = app.add_subcommand("generate", "Sample molecules from a trained run");
  add_common(generate, c, false);
  generate->add_option("-n,--count", count, "Molecules to sample")->check(CLI::PositiveNumber);
  generate->add_option("-o,--out", out, "Output .smi (default stdout)");
  generate->add_option("--strategy", strategy, "ran or bal")->check(CLI::IsMember({"ran", "bal"}));

  std::string generated, train_set, membership, label = "fragmenta", json_out;
  double sa_threshold = 6.0;
  auto* evaluate = app.add_subcommand("evaluate", "Score a generated set against a training set");
  evaluate->add_option("--generated", generated, "Generated SMILES file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--train", train_set, "Training SMILES file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--membership", membership, "Membership pattern file")->check(CLI::ExistingFile);
  evaluate->add_option("--label", label, "Row label");
  evaluate->add_option("--json", json_out, "Also write the report as JSON");
  evaluate->add_option("--sa-threshold", sa_threshold, "SA cut-off for discovery rate");

  RoundArgs ra;
  auto* round = app.add_subcommand("round", "Run or drive tuning rounds");
  add_common(round, c);
  round->add_option("--mode", ra.mode, "human-human, human-agent or agent-agent")
      ->check(CLI::IsMember({"human-human", "human-agent", "agent-agent"}));
  round->add_option("--rounds", ra.rounds, "Rounds to run in agent-agent mode")->check(CLI::PositiveNumber);
  round->add_option("--round", ra.number, "Round to act on (default: latest)")->check(CLI::PositiveNumber);
  auto* fb = round->add_option("--feedback", ra.feedback, "Submit a FeedbackRecord JSON file")->check(CLI::ExistingFile);
  auto* ed = round->add_option("--edit", ra.edit, "Human-human: replace the objective with this spec JSON")
                 ->check(CLI::ExistingFile);
  auto* ap = round->add_flag("--approve", ra.approve, "Apply pending rules");
  auto* rj = round->add_flag("--reject", ra.reject, "Drop pending rules");
  auto* sk = round->add_flag("--skip", ra.skip, "Close the round without feedback");
  round->add_option("--show", ra.show, "Top molecules to print");
  for (auto* a : {fb, ed, ap, rj, sk})
    for (auto* b : {fb, ed, ap, rj, sk})
      if (a != b) a->excludes(b);

  std::string host;
  int port = 0;
  auto* serve = app.add_subcommand("serve", "Serve the session wire API");
  add_common(serve, c);
  serve->add_option("--host", host, "Bind address (default from config)");
  serve->add_option("--port", port, "Port (default from config)")->check(CLI::Range(1, 65535));

  std::size_t top = 0;
  auto* inspect = app.add_subcommand("inspect-vocab", "List fragments of a trained run by frequency");
  add_common(inspect, c, false);
  inspect->add_option("--top", top, "Show only the most frequent N");

  std::size_t report_n = 1000;
  std::string report_out;
  auto* report = app.add_subcommand("export-report", "Evaluate a run and write a JSON report");
  add_common(report, c, false);
  report->add_option("-n,--count", report_n, "Molecules to sample for the evaluation")->check(CLI::PositiveNumber);
  report->add_option("-o,--out", report_out, "Report path (default run-dir/report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train) return cmd_train(c, data, epochs, resume);
    if (*generate) return cmd_generate(c, count, out, strategy);
    if (*evaluate) return cmd_evaluate(generated, train_set, membership, label, json_out, sa_threshold);
    if (*round) return cmd_round(c, ra);
    if (*serve) return cmd_serve(c, host, port);
    if (*inspect) return cmd_inspect_vocab(c, top);
    if (*report) return cmd_export_report(c, report_out, report_n);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
