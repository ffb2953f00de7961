#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "maasim/fixtures.hpp"
#include "maasim/moo.hpp"
#include "maasim/service.hpp"
#include "schema_check.hpp"

using namespace maasim;
using nlohmann::json;

namespace {

const json& schema() {
  static const json s = schema_check::load(std::string(MAASIM_SOURCE_DIR) + "/schemas/api.schema.json");
  return s;
}

void check_schema(const std::string& name, const json& body) {
  const auto errs = schema_check::errors(schema(), name, body);
  for (const auto& e : errs) FAIL_CHECK(e);
}

std::unique_ptr<Service> toy_service(std::size_t cap = 5000) {
  const auto g = fixtures::toy_game();
  return std::make_unique<Service>(g.forest, g.catalog, g.dataset, std::nullopt, Service::Options{cap});
}

Response call(Service& s, std::string_view method, std::string_view path, const json& body = json::object()) {
  return s.handle(method, path, method == "GET" ? "" : body.dump());
}

std::string create(Service& s, const std::string& nid = "toy") {
  const auto r = call(s, "POST", "/sessions", {{"neighbourhood_id", nid}});
  REQUIRE(r.status == 201);
  return r.body["session_id"].get<std::string>();
}

}  // namespace

TEST_CASE("read-only endpoints") {
  auto s = toy_service();
  auto r = call(*s, "GET", "/health");
  CHECK(r.status == 200);
  check_schema("health", r.body);

  r = call(*s, "GET", "/actions");
  CHECK(r.status == 200);
  check_schema("actions", r.body);
  CHECK(r.body.size() == 2);
  CHECK(r.body[0]["id"] == "A");

  r = call(*s, "GET", "/neighbourhoods");
  CHECK(r.status == 200);
  check_schema("neighbourhoods", r.body);
  CHECK(r.body == json::parse(R"([{"id":"toy","class":3},{"id":"toy-high","class":4}])"));
}

TEST_CASE("session lifecycle") {
  auto s = toy_service();
  auto r = call(*s, "POST", "/sessions", {{"neighbourhood_id", "toy"}});
  REQUIRE(r.status == 201);
  check_schema("session_created", r.body);
  const std::string id = r.body["session_id"];
  CHECK(id.size() == 16);
  CHECK(r.body["state"]["score"] == 3.0);
  CHECK(r.body["state"]["class"] == 3);
  CHECK(r.body["state"]["turns"] == 0);

  r = call(*s, "GET", "/sessions/" + id);
  CHECK(r.status == 200);
  check_schema("state", r.body);

  r = call(*s, "POST", "/sessions/" + id + "/actions", {{"action_id", "A"}});
  CHECK(r.status == 200);
  check_schema("state", r.body);
  CHECK(r.body["score"].get<double>() == doctest::Approx(3.5));
  CHECK(r.body["turns"] == 1);
  CHECK(r.body["history"] == json::array({"A"}));
  CHECK(r.body["indicators"][0]["value"].get<double>() == doctest::Approx(11.0));
  CHECK(r.body["indicators"][0]["baseline"] == 10.0);

  r = call(*s, "POST", "/sessions/" + id + "/apply-plan", {{"genome", "01"}});
  CHECK(r.status == 200);
  check_schema("state", r.body);
  CHECK(r.body["score"].get<double>() == doctest::Approx(3.6));
  CHECK(r.body["turns"] == 2);

  r = call(*s, "POST", "/sessions/" + id + "/undo");
  CHECK(r.status == 200);
  CHECK(r.body["score"].get<double>() == doctest::Approx(3.5));
  r = call(*s, "POST", "/sessions/" + id + "/undo");
  CHECK(r.body["score"] == 3.0);
  r = call(*s, "POST", "/sessions/" + id + "/undo");
  CHECK(r.status == 400);
  check_schema("error", r.body);
  CHECK(s->session_count() == 1);
}

TEST_CASE("optimize returns the exact toy front and leaves the session alone") {
  auto s = toy_service();
  const auto id = create(*s);
  const auto before = call(*s, "GET", "/sessions/" + id).body;
  for (auto a : kAlgorithms) {
    const std::string name(to_string(a));
    CAPTURE(name);
    const auto r = call(*s, "POST", "/sessions/" + id + "/optimize", {{"algorithm", name}, {"evaluations", 1000}, {"seed", 1}});
    REQUIRE(r.status == 200);
    check_schema("optimize_result", r.body);
    CHECK(r.body["algorithm"] == name);
    CHECK(r.body["evaluations"] == 1000);
    const auto& sol = r.body["solutions"];
    REQUIRE(sol.size() == 2);
    CHECK(sol[0]["genome"] == "10");
    CHECK(sol[0]["action_ids"] == json::array({"A"}));
    CHECK(sol[0]["turns"] == 1);
    CHECK(sol[0]["score"].get<double>() == doctest::Approx(3.5));
    CHECK(sol[1]["genome"] == "11");
    CHECK(sol[1]["score"].get<double>() == doctest::Approx(3.6));
  }
  CHECK(call(*s, "GET", "/sessions/" + id).body == before);

  const auto d = call(*s, "POST", "/sessions/" + id + "/optimize", {{"algorithm", "nsga2"}});
  CHECK(d.status == 200);
  CHECK(d.body["evaluations"] == 5000);
  CHECK(d.body["seed"] == 42);
}

TEST_CASE("optimize input errors") {
  auto s = toy_service(2000);
  const auto id = create(*s);
  const auto opt = "/sessions/" + id + "/optimize";
  auto r = call(*s, "POST", opt, {{"algorithm", "nsga2"}, {"evaluations", 2001}});
  CHECK(r.status == 422);
  check_schema("error", r.body);
  CHECK(call(*s, "POST", opt, {{"algorithm", "moead"}}).status == 400);
  CHECK(call(*s, "POST", opt, {{"algorithm", "nsga2"}, {"evaluations", 10}}).status == 400);
  CHECK(call(*s, "POST", opt, {{"algorithm", "nsga2"}, {"evaluations", -5}}).status == 400);
  CHECK(call(*s, "POST", opt, {{"algorithm", "nsga2"}, {"evaluations", "many"}}).status == 400);
  CHECK(call(*s, "POST", opt, {{"algorithm", "nsga2"}, {"budget", 100}}).status == 400);
  CHECK(call(*s, "POST", opt, json::object()).status == 400);
  CHECK(call(*s, "POST", "/sessions/nope/optimize", {{"algorithm", "nsga2"}}).status == 404);
}

TEST_CASE("request errors") {
  auto s = toy_service();
  const auto id = create(*s);
  CHECK(call(*s, "POST", "/sessions", {{"neighbourhood_id", "atlantis"}}).status == 404);
  CHECK(call(*s, "POST", "/sessions", {{"neighbourhood_id", "toy"}, {"extra", 1}}).status == 400);
  CHECK(call(*s, "POST", "/sessions", {{"neighbourhood_id", 7}}).status == 400);
  CHECK(s->handle("POST", "/sessions", "{not json").status == 400);
  CHECK(s->handle("POST", "/sessions", "[1,2]").status == 400);
  CHECK(call(*s, "GET", "/sessions/unknown").status == 404);
  CHECK(call(*s, "POST", "/sessions/" + id + "/actions", {{"action_id", "Z"}}).status == 400);
  CHECK(call(*s, "POST", "/sessions/" + id + "/apply-plan", {{"genome", "1"}}).status == 400);
  CHECK(call(*s, "POST", "/sessions/" + id + "/apply-plan", {{"genome", "00"}}).status == 400);
  CHECK(call(*s, "POST", "/sessions/" + id + "/apply-plan", {{"genome", "1x"}}).status == 400);
  CHECK(call(*s, "POST", "/sessions/" + id + "/undo", {{"steps", 2}}).status == 400);
  CHECK(call(*s, "GET", "/nowhere").status == 404);
  CHECK(call(*s, "POST", "/sessions/" + id + "/teleport").status == 404);
  const auto r = call(*s, "POST", "/health");
  CHECK(r.status == 405);
  check_schema("error", r.body);
  CHECK(call(*s, "DELETE", "/sessions/" + id).status == 405);
  // nothing above changed the session
  CHECK(call(*s, "GET", "/sessions/" + id).body["turns"] == 0);
}

TEST_CASE("request bodies match the request schemas") {
  check_schema("create_request", {{"neighbourhood_id", "toy"}});
  check_schema("action_request", {{"action_id", "A"}});
  check_schema("plan_request", {{"genome", "10"}});
  check_schema("optimize_request", {{"algorithm", "spea2"}, {"evaluations", 1000}, {"seed", 3}});
  CHECK_FALSE(schema_check::errors(schema(), "plan_request", {{"genome", "12"}}).empty());
  CHECK_FALSE(schema_check::errors(schema(), "optimize_request", {{"algorithm", "x"}}).empty());
}

TEST_CASE("snapshot and restore") {
  auto s = toy_service();
  const auto id = create(*s);
  call(*s, "POST", "/sessions/" + id + "/actions", {{"action_id", "B"}});
  const auto snap = s->snapshot();
  const auto state = call(*s, "GET", "/sessions/" + id).body;

  auto t = toy_service();
  t->restore(snap);
  CHECK(t->session_count() == 1);
  CHECK(call(*t, "GET", "/sessions/" + id).body == state);
  CHECK(call(*t, "POST", "/sessions/" + id + "/undo").body["score"] == 3.0);

  auto bad = snap;
  bad["sessions"][0]["state"]["neighbourhood_id"] = "atlantis";
  CHECK_THROWS_AS(t->restore(bad), FormatError);
  CHECK_THROWS_AS(t->restore(json::object()), FormatError);
  CHECK(t->session_count() == 1);
}

TEST_CASE("config file and environment") {
  std::istringstream in("# comment\nport = 9001\nhost=0.0.0.0\nmodel_path = m.json\n\nmax_evaluations = 300 # cap\n");
  auto cfg = parse_service_config(in);
  CHECK(cfg.port == 9001);
  CHECK(cfg.host == "0.0.0.0");
  CHECK(cfg.model_path == "m.json");
  CHECK(cfg.max_evaluations == 300);
  CHECK(cfg.cors_origin == "*");

  const std::map<std::string, std::string> env{{"PORT", "7000"}, {"MAX_EVALUATIONS", "50"}, {"CATALOG_PATH", "c.json"}};
  apply_env_overrides(cfg, [&](const char* k) -> const char* {
    const auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  CHECK(cfg.port == 7000);
  CHECK(cfg.max_evaluations == 50);
  CHECK(cfg.catalog_path == "c.json");
  CHECK(cfg.model_path == "m.json");

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(parse_service_config(unknown), ConfigError);
  std::istringstream noeq("port 80\n");
  CHECK_THROWS_AS(parse_service_config(noeq), ConfigError);
  std::istringstream badport("port = 70000\n");
  CHECK_THROWS_AS(parse_service_config(badport), ConfigError);

  std::ifstream shipped(std::string(MAASIM_SOURCE_DIR) + "/data/service.conf");
  REQUIRE(shipped);
  CHECK(parse_service_config(shipped).port == 8080);
}

TEST_CASE("service built from files") {
  const auto g = fixtures::toy_game();
  const auto dir = test::temp_dir("service-files");
  save_model(g.forest, dir / "model.json");
  {
    std::ofstream out(dir / "data.csv");
    write_dataset(g.dataset, out);
  }
  std::ofstream(dir / "catalog.json") << catalog_to_json(g.catalog, g.forest.feature_names).dump();
  ServiceConfig cfg;
  cfg.model_path = dir / "model.json";
  cfg.dataset_path = dir / "data.csv";
  cfg.catalog_path = dir / "catalog.json";
  cfg.snapshot_path = dir / "sessions.json";
  auto s = make_service(cfg);
  const auto id = create(*s);
  std::ofstream(dir / "sessions.json") << s->snapshot().dump();
  auto t = make_service(cfg);
  CHECK(t->session_count() == 1);
  CHECK(call(*t, "GET", "/sessions/" + id).status == 200);

  cfg.catalog_path.clear();
  CHECK_THROWS_AS(make_service(cfg), ConfigError);
}

TEST_CASE("concurrent sessions stay independent") {
  auto s = toy_service();
  std::vector<std::string> ids(10);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < ids.size(); ++i)
    threads.emplace_back([&, i] {
      ids[i] = s->handle("POST", "/sessions", R"({"neighbourhood_id":"toy"})").body["session_id"];
      for (std::size_t k = 0; k <= i; ++k) s->handle("POST", "/sessions/" + ids[i] + "/actions", R"({"action_id":"B"})");
    });
  for (auto& t : threads) t.join();
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == 10);
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(call(*s, "GET", "/sessions/" + ids[i]).body["turns"] == i + 1);

  // many writers on one session serialize
  const auto shared = create(*s);
  threads.clear();
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&] {
      for (int k = 0; k < 5; ++k) s->handle("POST", "/sessions/" + shared + "/actions", R"({"action_id":"A"})");
    });
  for (auto& t : threads) t.join();
  const auto st = call(*s, "GET", "/sessions/" + shared).body;
  CHECK(st["turns"] == 40);
  CHECK(st["indicators"][0]["value"].get<double>() == doctest::Approx(50.0));
}

TEST_CASE("http transport with CORS") {
  auto s = toy_service();
  HttpServer server(*s, "http://localhost:5173");
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  auto r = client.Get("/health");
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  CHECK(json::parse(r->body) == json{{"status", "ok"}});

  r = client.Post("/sessions", R"({"neighbourhood_id":"toy"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 201);
  const std::string id = json::parse(r->body)["session_id"];
  r = client.Post("/sessions/" + id + "/actions", R"({"action_id":"A"})", "application/json");
  REQUIRE(r);
  CHECK(json::parse(r->body)["turns"] == 1);

  r = client.Options("/sessions");
  REQUIRE(r);
  CHECK(r->status == 204);
  CHECK(r->has_header("Access-Control-Allow-Methods"));

  r = client.Get("/sessions/missing");
  REQUIRE(r);
  CHECK(r->status == 404);

  server.stop();
  loop.join();
}
