#include "fragmenta/app/server.hpp"

#include <regex>

#include "fragmenta/chem/errors.hpp"
#include "fragmenta/chem/smiles.hpp"
#include "fragmenta/util/digest.hpp"
#include "httplib.h"

namespace fragmenta::app {

using nlohmann::json;

namespace {

ApiResponse error(int status, const std::string& message) { return {status, json{{"error", message}}}; }

const std::regex kRoundPath(R"(^/rounds/(\d+)/(molecules|feedback|skip)$)");

json session_json(const Campaign& c) {
  const Round* current = c.current_round();
  const bool open = current && current->status == RoundStatus::Open;
  json rounds = json::array();
  for (const auto& r : c.rounds()) rounds.push_back(to_json(r, false));
  json pending = json::array();
  for (const auto& r : c.session().pending()) pending.push_back(tuning::to_json(r));
  return {{"mode", tuning::to_string(c.config().tuning.mode)},
          {"seed", c.config().seed},
          {"config_digest", c.config().digest()},
          {"epoch", c.state().epoch},
          {"objective_version", c.session().spec().version},
          {"status", open ? "awaiting_feedback" : "idle"},
          {"current_round", open ? json(current->number) : json(nullptr)},
          {"rounds", std::move(rounds)},
          {"pending", std::move(pending)}};
}

json objective_json(const Campaign& c) {
  return {{"objective", obj::to_json(c.session().spec())}, {"history", c.session().kb().to_json().at("history")}};
}

json metrics_json(const Campaign& c) {
  json epochs = json::array();
  for (const auto& m : c.state().metrics) epochs.push_back(to_json(m));
  return {{"epochs", std::move(epochs)}};
}

json molecules_json(const Round& r) {
  json j = to_json(r, true);
  return {{"round", r.number}, {"status", j["status"]}, {"molecules", std::move(j["molecules"])}};
}

json validate_pattern(const json& body) {
  if (!body.contains("pattern") || !body["pattern"].is_string())
    throw tuning::SchemaViolation("body needs a string \"pattern\"");
  const auto text = body["pattern"].get<std::string>();
  try {
    (void)chem::parse_pattern(text);
    return {{"pattern", text}, {"valid", true}};
  } catch (const chem::SmilesError& e) {
    json out{{"pattern", text}, {"valid", false}, {"error", e.what()}};
    if (e.position() != std::string::npos) out["position"] = e.position();
    return out;
  }
}

}  // namespace

SessionService::SessionService(Campaign& campaign) : campaign_(campaign) { refresh(); }

std::shared_ptr<const SessionService::Snapshot> SessionService::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

void SessionService::refresh() {
  auto s = std::make_shared<Snapshot>();
  s->session = session_json(campaign_);
  s->objective = objective_json(campaign_);
  s->metrics = metrics_json(campaign_);
  for (const auto& r : campaign_.rounds()) s->molecules[r.number] = molecules_json(r);
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(s);
}

ApiResponse SessionService::handle(const std::string& method, const std::string& path, const std::string& body,
                                   const std::string& request_id_header) {
  if (method == "GET") return read(path);
  if (method != "POST") return error(405, "method not allowed: " + method);

  json parsed = json::object();
  if (!body.empty()) {
    parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) return error(422, "body is not a JSON object");
  }
  std::string request_id = request_id_header;
  if (parsed.contains("request_id")) {
    if (!parsed["request_id"].is_string()) return error(422, "request_id must be a string");
    request_id = parsed["request_id"].get<std::string>();
    parsed.erase("request_id");
  }

  std::lock_guard lock(mutate_);
  const std::string fingerprint = hex_digest(path + '\n' + parsed.dump());
  if (!request_id.empty()) {
    const auto it = replies_.find(request_id);
    if (it != replies_.end()) {
      if (it->second.fingerprint != fingerprint) return error(422, "request id " + request_id + " reused with a different request");
      return it->second.response;
    }
  }
  ApiResponse response = mutate(path, parsed);
  refresh();
  if (!request_id.empty()) replies_[request_id] = {fingerprint, response};
  return response;
}

ApiResponse SessionService::read(const std::string& path) const {
  const auto s = snapshot();
  if (path == "/session") return {200, s->session};
  if (path == "/objective") return {200, s->objective};
  if (path == "/metrics") return {200, s->metrics};
  std::smatch m;
  if (std::regex_match(path, m, kRoundPath) && m[2] == "molecules") {
    const auto it = s->molecules.find(std::stoi(m[1]));
    if (it == s->molecules.end()) return error(404, "no round " + m[1].str());
    return {200, it->second};
  }
  return error(404, "no route GET " + path);
}

ApiResponse SessionService::mutate(const std::string& path, const json& body) {
  try {
    if (path == "/rounds") return {201, to_json(campaign_.open_round(), false)};
    if (path == "/approvals") {
      if (!body.contains("approve") || !body["approve"].is_boolean())
        throw tuning::SchemaViolation("body needs a boolean \"approve\"");
      return {200, tuning::to_json(campaign_.approve_pending(body["approve"].get<bool>()))};
    }
    if (path == "/patterns/validate") return {200, validate_pattern(body)};

    std::smatch m;
    if (!std::regex_match(path, m, kRoundPath) || m[2] == "molecules") return error(404, "no route POST " + path);
    const int number = std::stoi(m[1]);
    (void)campaign_.round(number);  // 404 before looking at the body
    if (m[2] == "skip") {
      campaign_.skip_round(number);
      return {200, to_json(campaign_.round(number), false)};
    }
    if (body.contains("objective")) {
      json spec;
      try {
        spec = obj::to_json(campaign_.operator_edit(number, obj::spec_from_json(body["objective"])));
      } catch (const std::logic_error& e) {
        if (dynamic_cast<const RoundClosed*>(&e)) throw;
        throw tuning::SchemaViolation(e.what());
      }
      return {200, json{{"objective", spec}, {"resolved", true}}};
    }
    const auto record = tuning::record_from_json(body);
    const auto outcome = campaign_.submit_feedback(number, record);
    json out = tuning::to_json(outcome);
    if (outcome.clarification) out["clarification"] = tuning::to_json(*outcome.clarification);
    return {200, out};
  } catch (const UnknownRound& e) {
    return error(404, e.what());
  } catch (const RoundClosed& e) {
    return error(409, e.what());
  } catch (const RoundAlreadyOpen& e) {
    return error(409, e.what());
  } catch (const tuning::SchemaViolation& e) {
    return error(422, e.what());
  } catch (const obj::UnknownTerm& e) {
    return error(422, e.what());
  } catch (const json::exception& e) {
    return error(422, e.what());
  } catch (const std::invalid_argument& e) {
    return error(422, e.what());
  }
}

bool serve(SessionService& service, const std::string& host, int port) {
  httplib::Server server;
  const auto bridge = [&service](const httplib::Request& req, httplib::Response& res) {
    ApiResponse r;
    try {
      r = service.handle(req.method, req.path, req.body, req.get_header_value("X-Request-Id"));
    } catch (const std::exception& e) {
      r = error(500, e.what());
    }
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(R"(/.*)", bridge);
  server.Post(R"(/.*)", bridge);
  return server.listen(host, port);
}

}  // namespace fragmenta::app
