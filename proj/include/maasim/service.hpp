#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "maasim/analysis.hpp"
#include "maasim/dataset.hpp"
#include "maasim/forest.hpp"
#include "maasim/simcore.hpp"

namespace maasim {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model_path;
  std::filesystem::path dataset_path;
  std::filesystem::path catalog_path;
  std::optional<std::filesystem::path> groups_path;  // computed from the model when absent
  std::size_t max_evaluations = 20000;
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> snapshot_path;  // sessions saved on shutdown, restored on start
};

// "key = value" lines; '#' starts a comment. Unknown keys are rejected.
ServiceConfig parse_service_config(std::istream& in);
ServiceConfig load_service_config(const std::filesystem::path& path);
// PORT, MODEL_PATH, DATASET_PATH, CATALOG_PATH, MAX_EVALUATIONS.
void apply_env_overrides(ServiceConfig& cfg, const std::function<const char*(const char*)>& getenv_fn);

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Routes requests to game sessions. The model, dataset and catalog are
// immutable after construction; each session has its own mutex, so requests
// on different sessions run concurrently and requests on one session are
// serialized.
class Service {
 public:
  struct Options {
    std::size_t max_evaluations = 20000;
  };

  // The dataset is projected onto the model's features. Group weights are
  // computed from the model when not given.
  Service(Forest forest, ActionCatalog catalog, const Dataset& dataset, std::optional<GroupWeights> groups,
          Options options);
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  std::size_t session_count() const;
  const Forest& forest() const noexcept { return forest_; }
  const ActionCatalog& catalog() const noexcept { return catalog_; }

  nlohmann::json snapshot() const;
  // Replaces every session; sessions referring to unknown neighbourhoods are
  // rejected with FormatError.
  void restore(const nlohmann::json& j);

 private:
  struct Session {
    std::mutex mutex;
    SessionState state;
    std::string created_at;
  };

  Response create_session(const nlohmann::json& body);
  Response get_session(const std::string& id);
  Response post_action(const std::string& id, const nlohmann::json& body);
  Response apply_plan(const std::string& id, const nlohmann::json& body);
  Response undo(const std::string& id, const nlohmann::json& body);
  Response optimize(const std::string& id, const nlohmann::json& body);
  Response list_actions() const;
  Response list_neighbourhoods() const;

  std::shared_ptr<Session> find(const std::string& id) const;
  nlohmann::json state_json(const std::string& id, const SessionState& s) const;
  std::string new_session_id();

  Forest forest_;
  ActionCatalog catalog_;
  Dataset dataset_;
  GroupWeights groups_;
  Options options_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex id_mutex_;
  std::uint64_t id_state_;
};

std::unique_ptr<Service> make_service(const ServiceConfig& cfg);

// HTTP transport over a Service, with CORS headers for the UI origin.
class HttpServer {
 public:
  HttpServer(Service& service, std::string cors_origin);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 binds any free port. Returns the bound port.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace maasim
