#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "fragmenta/app/campaign.hpp"
#include "json.hpp"

namespace fragmenta::app {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// The session wire API over one campaign, independent of the transport.
///
///   GET  /session                   campaign summary and round list
///   GET  /rounds/{n}/molecules      ranked top-N of round n
///   POST /rounds/{n}/feedback       FeedbackRecord, or {"objective": spec} in human-human mode
///   POST /rounds/{n}/skip
///   POST /rounds                    open the next round
///   POST /approvals                 {"approve": bool} for pending human-agent rules
///   POST /patterns/validate         {"pattern": "..."}
///   GET  /objective                 current spec plus history
///   GET  /metrics                   per-epoch metrics
///
/// Mutations run one at a time under a lock. Reads are answered from a JSON
/// snapshot rebuilt after every mutation, so they never see a half-applied
/// change. A mutating request carrying "request_id" (body field or
/// X-Request-Id header) is answered once; repeats get the cached response.
/// Errors: 404 unknown round or route, 409 round closed or already open,
/// 422 schema violation or a request id reused with a different body.
class SessionService {
 public:
  explicit SessionService(Campaign& campaign);

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body,
                     const std::string& request_id_header = {});

 private:
  struct Snapshot {
    nlohmann::json session;
    nlohmann::json objective;
    nlohmann::json metrics;
    std::map<int, nlohmann::json> molecules;
  };
  struct Cached {
    std::string fingerprint;
    ApiResponse response;
  };

  Campaign& campaign_;
  std::mutex mutate_;
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::map<std::string, Cached> replies_;

  std::shared_ptr<const Snapshot> snapshot() const;
  void refresh();
  ApiResponse read(const std::string& path) const;
  ApiResponse mutate(const std::string& path, const nlohmann::json& body);
};

/// Blocks serving `service` over HTTP until the process is stopped.
/// Returns false when the address cannot be bound.
bool serve(SessionService& service, const std::string& host, int port);

}  // namespace fragmenta::app
