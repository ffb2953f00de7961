#include "maasim/service.hpp"

#include <algorithm>
#include <charconv>
#include <ctime>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "httplib.h"
#include "maasim/moo.hpp"

namespace maasim {

namespace {

struct HttpError {
  int status;
  std::string message;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' must be a non-negative integer, got '" + v + "'");
  return out;
}

int parse_port(const std::string& v) {
  const auto p = parse_count("port", v);
  if (p > 65535) throw ConfigError("port out of range: " + v);
  return static_cast<int>(p);
}

std::vector<std::string> split_path(std::string_view path) {
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto j = std::min(path.find('/', i), path.size());
    parts.emplace_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

nlohmann::json parse_body(std::string_view body) {
  if (trim(body).empty()) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw HttpError{400, "request body is not valid JSON"};
  if (!j.is_object()) throw HttpError{400, "request body must be a JSON object"};
  return j;
}

void only_fields(const nlohmann::json& body, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : body.items())
    if (!allowed.contains(key)) throw HttpError{400, "unknown field '" + key + "'"};
}

const nlohmann::json& required(const nlohmann::json& body, const std::string& key) {
  if (!body.contains(key)) throw HttpError{400, "missing field '" + key + "'"};
  return body.at(key);
}

std::string string_field(const nlohmann::json& body, const std::string& key) {
  const auto& v = required(body, key);
  if (!v.is_string()) throw HttpError{400, "'" + key + "' must be a string"};
  return v.get<std::string>();
}

std::uint64_t count_field(const nlohmann::json& body, const std::string& key, std::uint64_t fallback) {
  if (!body.contains(key)) return fallback;
  const auto& v = body.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    throw HttpError{400, "'" + key + "' must be a non-negative integer"};
  return v.get<std::uint64_t>();
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Response error(int status, const std::string& message) { return {status, {{"error", message}}}; }

}  // namespace

ServiceConfig parse_service_config(std::istream& in) {
  ServiceConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "host") cfg.host = value;
    else if (key == "port") cfg.port = parse_port(value);
    else if (key == "model_path") cfg.model_path = value;
    else if (key == "dataset_path") cfg.dataset_path = value;
    else if (key == "catalog_path") cfg.catalog_path = value;
    else if (key == "groups_path") cfg.groups_path = value;
    else if (key == "max_evaluations") cfg.max_evaluations = parse_count(key, value);
    else if (key == "cors_origin") cfg.cors_origin = value;
    else if (key == "snapshot_path") cfg.snapshot_path = value;
    else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return cfg;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_service_config(in);
}

void apply_env_overrides(ServiceConfig& cfg, const std::function<const char*(const char*)>& getenv_fn) {
  if (const char* v = getenv_fn("PORT")) cfg.port = parse_port(v);
  if (const char* v = getenv_fn("MODEL_PATH")) cfg.model_path = v;
  if (const char* v = getenv_fn("DATASET_PATH")) cfg.dataset_path = v;
  if (const char* v = getenv_fn("CATALOG_PATH")) cfg.catalog_path = v;
  if (const char* v = getenv_fn("MAX_EVALUATIONS")) cfg.max_evaluations = parse_count("MAX_EVALUATIONS", v);
}

Service::Service(Forest forest, ActionCatalog catalog, const Dataset& dataset, std::optional<GroupWeights> groups,
                 Options options)
    : forest_(std::move(forest)),
      catalog_(std::move(catalog)),
      dataset_(project_columns(dataset, forest_.feature_names)),
      options_(options),
      id_state_(std::random_device{}() ^ static_cast<std::uint64_t>(
                                              std::chrono::steady_clock::now().time_since_epoch().count())) {
  if (options_.max_evaluations == 0) throw ConfigError("max_evaluations must be positive");
  groups_ = groups ? std::move(*groups) : group_weights(forest_, dataset_);
}

std::size_t Service::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::string Service::new_session_id() {
  std::lock_guard lock(id_mutex_);
  // splitmix64 step
  std::uint64_t z = (id_state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(z));
  return buf;
}

std::shared_ptr<Service::Session> Service::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError{404, "unknown session '" + id + "'"};
  return it->second;
}

nlohmann::json Service::state_json(const std::string& id, const SessionState& s) const {
  nlohmann::json indicators = nlohmann::json::array();
  for (std::size_t k = 0; k < s.current.size(); ++k)
    indicators.push_back({{"name", forest_.feature_names[k]},
                          {"group", std::string(to_string(dataset_.meta[k].group))},
                          {"baseline", s.baseline[k]},
                          {"value", s.current[k]}});
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [g, v] : group_scores(s.current, groups_, s.baseline)) groups[std::string(to_string(g))] = v;
  return {{"session_id", id},
          {"neighbourhood_id", s.neighbourhood_id},
          {"indicators", std::move(indicators)},
          {"groups", std::move(groups)},
          {"score", s.score},
          {"class", predict_class(forest_, s.current)},
          {"turns", s.turns},
          {"history", s.history}};
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    const auto parts = split_path(path);
    const auto allow = [&](std::string_view m) {
      if (method != m) throw HttpError{405, "method " + std::string(method) + " not allowed on " + std::string(path)};
    };
    if (parts.size() == 1 && parts[0] == "health") {
      allow("GET");
      return {200, {{"status", "ok"}}};
    }
    if (parts.size() == 1 && parts[0] == "actions") {
      allow("GET");
      return list_actions();
    }
    if (parts.size() == 1 && parts[0] == "neighbourhoods") {
      allow("GET");
      return list_neighbourhoods();
    }
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1) {
        allow("POST");
        return create_session(parse_body(body));
      }
      if (parts.size() == 2) {
        allow("GET");
        return get_session(parts[1]);
      }
      if (parts.size() == 3) {
        allow("POST");
        const auto json = parse_body(body);
        if (parts[2] == "actions") return post_action(parts[1], json);
        if (parts[2] == "apply-plan") return apply_plan(parts[1], json);
        if (parts[2] == "undo") return undo(parts[1], json);
        if (parts[2] == "optimize") return optimize(parts[1], json);
      }
    }
    return error(404, "no route for " + std::string(method) + " " + std::string(path));
  } catch (const HttpError& e) {
    return error(e.status, e.message);
  } catch (const InputError& e) {
    return error(400, e.what());
  } catch (const std::exception& e) {
    return error(500, e.what());
  }
}

Response Service::create_session(const nlohmann::json& body) {
  only_fields(body, {"neighbourhood_id"});
  const std::string nid = string_field(body, "neighbourhood_id");
  const auto row = dataset_.row_index(nid);
  if (!row) throw HttpError{404, "unknown neighbourhood '" + nid + "'"};
  const auto x = dataset_.records.row(*row);

  auto session = std::make_shared<Session>();
  session->state = start_session(nid, std::vector<double>(x.begin(), x.end()), forest_);
  session->created_at = utc_now();
  std::string id;
  {
    std::unique_lock lock(sessions_mutex_);
    do id = new_session_id();
    while (sessions_.contains(id));
    sessions_.emplace(id, session);
  }
  return {201, {{"session_id", id}, {"created_at", session->created_at}, {"state", state_json(id, session->state)}}};
}

Response Service::get_session(const std::string& id) {
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  return {200, state_json(id, s->state)};
}

Response Service::post_action(const std::string& id, const nlohmann::json& body) {
  only_fields(body, {"action_id"});
  const std::string aid = string_field(body, "action_id");
  const auto s = find(id);
  const ActionSpec* a = catalog_.find(aid);
  if (!a) throw HttpError{400, "unknown action '" + aid + "'"};
  std::lock_guard lock(s->mutex);
  s->state = maasim::apply_action(std::move(s->state), *a, forest_);
  return {200, state_json(id, s->state)};
}

Response Service::apply_plan(const std::string& id, const nlohmann::json& body) {
  only_fields(body, {"genome"});
  const Genome g = Genome::from_string(string_field(body, "genome"));
  if (g.size() != catalog_.size())
    throw HttpError{400, "genome must have " + std::to_string(catalog_.size()) + " bits"};
  if (g.none()) throw HttpError{400, "plan selects no action"};
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  s->state = maasim::apply_plan(std::move(s->state), g, catalog_, forest_);
  return {200, state_json(id, s->state)};
}

Response Service::undo(const std::string& id, const nlohmann::json& body) {
  only_fields(body, {});
  const auto s = find(id);
  std::lock_guard lock(s->mutex);
  if (s->state.history.empty()) throw HttpError{400, "nothing to undo"};
  s->state = maasim::undo(std::move(s->state), forest_);
  return {200, state_json(id, s->state)};
}

Response Service::optimize(const std::string& id, const nlohmann::json& body) {
  only_fields(body, {"algorithm", "evaluations", "seed"});
  const std::string name = string_field(body, "algorithm");
  Algorithm algorithm;
  try {
    algorithm = algorithm_from_string(name);
  } catch (const ConfigError& e) {
    throw HttpError{400, e.what()};
  }
  AlgoConfig cfg;
  cfg.evaluations = count_field(body, "evaluations", std::min<std::size_t>(10000, options_.max_evaluations));
  cfg.seed = count_field(body, "seed", 42);
  if (cfg.evaluations > options_.max_evaluations)
    throw HttpError{422, "evaluations " + std::to_string(cfg.evaluations) + " exceed the server cap of " +
                             std::to_string(options_.max_evaluations)};
  cfg.validate();

  const auto s = find(id);
  SessionState base;
  {
    std::lock_guard lock(s->mutex);
    base = s->state;
  }
  // The solver works on a copy; the session is left as it was.
  const SimulationProblem problem(forest_, catalog_, std::move(base));
  Front front = run_algorithm(algorithm, problem, cfg);
  sort_front(front);

  nlohmann::json solutions = nlohmann::json::array();
  for (const auto& ind : front) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < catalog_.size(); ++i)
      if (ind.genome[i]) ids.push_back(catalog_[i].id);
    solutions.push_back(
        {{"genome", ind.genome.to_string()}, {"action_ids", ids}, {"score", ind.obj.score}, {"turns", ind.obj.turns}});
  }
  return {200,
          {{"session_id", id},
           {"algorithm", std::string(to_string(algorithm))},
           {"evaluations", cfg.evaluations},
           {"seed", cfg.seed},
           {"solutions", std::move(solutions)}}};
}

Response Service::list_actions() const { return {200, catalog_to_json(catalog_, forest_.feature_names)}; }

Response Service::list_neighbourhoods() const {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t r = 0; r < dataset_.rows(); ++r) out.push_back({{"id", dataset_.ids[r]}, {"class", dataset_.classes[r]}});
  return {200, std::move(out)};
}

nlohmann::json Service::snapshot() const {
  std::vector<std::pair<std::string, std::shared_ptr<Session>>> all;
  {
    std::shared_lock lock(sessions_mutex_);
    all.assign(sessions_.begin(), sessions_.end());
  }
  nlohmann::json sessions = nlohmann::json::array();
  for (const auto& [id, s] : all) {
    std::lock_guard lock(s->mutex);
    sessions.push_back({{"session_id", id}, {"created_at", s->created_at}, {"state", session_to_json(s->state)}});
  }
  return {{"sessions", std::move(sessions)}};
}

void Service::restore(const nlohmann::json& j) {
  std::map<std::string, std::shared_ptr<Session>> loaded;
  try {
    for (const auto& e : j.at("sessions")) {
      auto s = std::make_shared<Session>();
      s->state = session_from_json(e.at("state"));
      s->created_at = e.at("created_at").get<std::string>();
      if (!dataset_.row_index(s->state.neighbourhood_id))
        throw FormatError("snapshot refers to unknown neighbourhood '" + s->state.neighbourhood_id + "'");
      if (s->state.current.size() != forest_.n_features)
        throw FormatError("snapshot session does not match the model's features");
      s->state.score = predict(forest_, s->state.current);
      if (!loaded.emplace(e.at("session_id").get<std::string>(), std::move(s)).second)
        throw FormatError("duplicate session id in snapshot");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed session snapshot: ") + e.what());
  }
  std::unique_lock lock(sessions_mutex_);
  sessions_ = std::move(loaded);
}

std::unique_ptr<Service> make_service(const ServiceConfig& cfg) {
  if (cfg.model_path.empty() || cfg.dataset_path.empty() || cfg.catalog_path.empty())
    throw ConfigError("model_path, dataset_path and catalog_path are required");
  Forest forest = load_model(cfg.model_path);
  const Dataset dataset = load_dataset(cfg.dataset_path);
  ActionCatalog catalog = load_catalog(cfg.catalog_path, forest.feature_names);
  std::optional<GroupWeights> groups;
  if (cfg.groups_path) {
    std::ifstream in(*cfg.groups_path);
    if (!in) throw ConfigError("cannot open groups '" + cfg.groups_path->string() + "'");
    try {
      groups = GroupWeights::from_json(nlohmann::json::parse(in), forest.feature_names);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("malformed groups file: " + std::string(e.what()));
    }
  }
  auto service = std::make_unique<Service>(std::move(forest), std::move(catalog), dataset, std::move(groups),
                                           Service::Options{cfg.max_evaluations});
  if (cfg.snapshot_path && std::filesystem::exists(*cfg.snapshot_path)) {
    std::ifstream in(*cfg.snapshot_path);
    try {
      service->restore(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("malformed snapshot: " + std::string(e.what()));
    }
  }
  return service;
}

struct HttpServer::Impl {
  Impl(Service& s, std::string o) : service(s), origin(std::move(o)) {}
  Service& service;
  std::string origin;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, std::string cors_origin)
    : impl_(std::make_unique<Impl>(service, std::move(cors_origin))) {
  auto& svr = impl_->server;
  svr.set_default_headers({{"Access-Control-Allow-Origin", impl_->origin},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  const auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  svr.Get(R"(/.*)", forward);
  svr.Post(R"(/.*)", forward);
  svr.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw ConfigError("cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace maasim
