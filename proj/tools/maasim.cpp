// maasim command line: synthetic data, training pipeline, single optimizer
// runs, the algorithm benchmark and the HTTP service.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "maasim/bench.hpp"
#include "maasim/fixtures.hpp"
#include "maasim/moo.hpp"
#include "maasim/pipeline.hpp"
#include "maasim/service.hpp"

namespace fs = std::filesystem;
using namespace maasim;

namespace {

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + p.string() + "'");
  out << j.dump(2) << '\n';
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

std::size_t parse_size(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty() || s[0] == '-') throw ConfigError("expected a non-negative integer, got '" + s + "'");
  return static_cast<std::size_t>(v);
}

// Everything an optimizer run needs, loaded from the three input files.
struct GameInputs {
  std::string dataset, model, catalog, neighbourhood;

  void add_options(CLI::App* app) {
    app->add_option("--dataset", dataset, "Neighbourhood dataset (CSV)")->required();
    app->add_option("--model", model, "Trained model (JSON)")->required();
    app->add_option("--catalog", catalog, "Action catalog (JSON)")->required();
    app->add_option("--neighbourhood", neighbourhood, "Neighbourhood id to optimise")->required();
  }

  fixtures::Game load() const {
    fixtures::Game g;
    g.forest = load_model(model);
    g.catalog = load_catalog(catalog, g.forest.feature_names);
    g.dataset = load_dataset(dataset);
    g.neighbourhood = neighbourhood;
    return g;
  }
};

struct AlgoOptions {
  std::size_t population = 100;
  std::size_t archive = 100;
  double epsilon = 0.01;

  void add_options(CLI::App* app) {
    app->add_option("--population", population, "Population size")->capture_default_str();
    app->add_option("--archive", archive, "Archive size")->capture_default_str();
    app->add_option("--epsilon", epsilon, "Box side for eps-MOEA")->capture_default_str();
  }
  AlgoConfig config() const {
    AlgoConfig c;
    c.population = population;
    c.archive = archive;
    c.epsilon = epsilon;
    return c;
  }
};

int cmd_synth(const std::string& kind, std::uint64_t seed, const fs::path& out, bool seed_given) {
  fs::create_directories(out);
  if (kind == "planted" || kind == "demo") {
    const auto cfg = kind == "planted" ? fixtures::planted_config(seed_given ? seed : 7)
                                       : fixtures::demo_config(seed_given ? seed : 3);
    save_dataset(generate_synthetic(cfg), out / "dataset.csv");
    write_json(out / "catalog.json", fixtures::default_catalog_json());
  } else if (kind == "survey") {
    save_dataset(fixtures::survey_like(seed_given ? seed : 11).data, out / "dataset.csv");
    write_json(out / "pipeline.json", fixtures::survey_pipeline_config().to_json());
  } else if (kind == "plateau" || kind == "toy") {
    const auto g = kind == "plateau" ? fixtures::plateau_game() : fixtures::toy_game();
    save_dataset(g.dataset, out / "dataset.csv");
    save_model(g.forest, out / "model.json");
    write_json(out / "catalog.json", catalog_to_json(g.catalog, g.forest.feature_names));
  } else {
    throw ConfigError("unknown kind '" + kind + "'");
  }
  std::cout << "wrote " << kind << " fixture to " << out.string() << '\n';
  return 0;
}

int cmd_pipeline(const fs::path& dataset, const fs::path& out, const std::string& config) {
  const PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_pipeline_config(config);
  const auto result = run_pipeline(load_dataset(dataset), cfg);
  write_pipeline_outputs(result, out);
  std::cout << result.report.to_text();
  std::cout << "features kept: " << result.forest.n_features << '\n';
  if (result.cv) std::cout << result.cv->k << "-fold macro recall: " << result.cv->macro_recall << '\n';
  return 0;
}

int cmd_optimize(const GameInputs& in, const AlgoOptions& opts, const std::string& algorithm, std::size_t evaluations,
                 std::uint64_t seed) {
  const auto game = in.load();
  const SimulationProblem problem(game.forest, game.catalog, game.session());
  AlgoConfig cfg = opts.config();
  cfg.evaluations = evaluations;
  cfg.seed = seed;
  const Algorithm a = algorithm_from_string(algorithm);
  Front front = run_algorithm(a, problem, cfg);
  sort_front(front);
  std::cout << run_to_json(a, seed, evaluations, front).dump(2) << '\n';
  return 0;
}

int cmd_bench(const GameInputs& in, const AlgoOptions& opts, const std::string& algorithms,
              const std::string& budgets, std::size_t runs, std::uint64_t seed, const fs::path& out,
              std::size_t jobs) {
  const auto game = in.load();
  const SimulationProblem problem(game.forest, game.catalog, game.session());
  BenchPlan plan;
  plan.algorithms.clear();
  for (const auto& a : split_list(algorithms)) plan.algorithms.push_back(algorithm_from_string(a));
  plan.budgets.clear();
  for (const auto& b : split_list(budgets)) plan.budgets.push_back(parse_size(b));
  plan.runs = runs;
  plan.base_seed = seed;
  plan.algo = opts.config();
  plan.jobs = jobs;
  plan.out = out;
  const auto result = run_bench(problem, plan);
  write_bench_outputs(result, out);
  std::cout << summary_csv(result);
  std::cout << "reference front: " << result.reference.size() << " members"
            << (result.reference_is_oracle ? " (exact)" : " (union of runs)") << '\n';
  return 0;
}

int cmd_serve(const std::string& config, int port) {
  ServiceConfig cfg = config.empty() ? ServiceConfig{} : load_service_config(config);
  apply_env_overrides(cfg, [](const char* k) { return std::getenv(k); });
  if (port >= 0) cfg.port = port;
  auto service = make_service(cfg);

  // Signals are taken by a dedicated thread so stop() never runs inside a
  // signal handler.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  HttpServer server(*service, cfg.cors_origin);
  const int bound = server.bind(cfg.host, cfg.port);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  std::cout << "listening on http://" << cfg.host << ':' << bound << std::endl;
  server.listen();
  waiter.join();
  if (cfg.snapshot_path) {
    write_json(*cfg.snapshot_path, service->snapshot());
    std::cout << "saved " << service->session_count() << " sessions to " << cfg.snapshot_path->string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maasim: liveability simulation, training pipeline and optimisation advisor"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Write a reproducible synthetic dataset (and model/catalog for game fixtures)");
  std::string kind;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  synth->add_option("--kind", kind, "planted, demo, survey, plateau or toy")
      ->required()
      ->check(CLI::IsMember({"planted", "demo", "survey", "plateau", "toy"}));
  auto* seed_opt = synth->add_option("--seed", synth_seed, "Generator seed (fixture default when omitted)");
  synth->add_option("--out", synth_out, "Output directory")->required();

  auto* pipeline = app.add_subcommand("pipeline", "Clean, balance, train, prune and cross-validate");
  std::string p_dataset, p_out, p_config;
  pipeline->add_option("--dataset", p_dataset, "Raw dataset (CSV)")->required();
  pipeline->add_option("--out", p_out, "Output directory")->required();
  pipeline->add_option("--config", p_config, "Pipeline config (JSON)");

  auto* optimize = app.add_subcommand("optimize", "Single optimizer run; front as JSON on stdout");
  GameInputs o_in;
  AlgoOptions o_opts;
  std::string o_alg;
  std::size_t o_evals = 10000;
  std::uint64_t o_seed = 42;
  o_in.add_options(optimize);
  o_opts.add_options(optimize);
  optimize->add_option("--algorithm", o_alg, "nsga2, paes, spea2 or epsmoea")->required();
  optimize->add_option("--evaluations", o_evals, "Evaluation budget")->capture_default_str();
  optimize->add_option("--seed", o_seed, "Random seed")->capture_default_str();

  auto* bench = app.add_subcommand("bench", "Algorithm tournament with metrics and significance matrices");
  GameInputs b_in;
  AlgoOptions b_opts;
  std::string b_algs = "nsga2,paes,spea2,epsmoea", b_budgets = "10000,20000", b_out;
  std::size_t b_runs = 10, b_jobs = 0;
  std::uint64_t b_seed = 42;
  b_in.add_options(bench);
  b_opts.add_options(bench);
  bench->add_option("--algorithms", b_algs, "Comma-separated algorithms")->capture_default_str();
  bench->add_option("--evaluations", b_budgets, "Comma-separated evaluation budgets")->capture_default_str();
  bench->add_option("--runs", b_runs, "Runs per algorithm and budget")->capture_default_str();
  bench->add_option("--seed", b_seed, "Base seed; run r uses seed + r")->capture_default_str();
  bench->add_option("--out", b_out, "Output directory")->required();
  bench->add_option("--jobs", b_jobs, "Concurrent runs (0: all cores)")->capture_default_str();

  auto* serve = app.add_subcommand("serve", "Run the HTTP game service");
  std::string s_config;
  int s_port = -1;
  serve->add_option("--config", s_config, "Service config (key = value)");
  serve->add_option("--port", s_port, "Port, overriding config and PORT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(kind, synth_seed, synth_out, seed_opt->count() > 0);
    if (*pipeline) return cmd_pipeline(p_dataset, p_out, p_config);
    if (*optimize) return cmd_optimize(o_in, o_opts, o_alg, o_evals, o_seed);
    if (*bench) return cmd_bench(b_in, b_opts, b_algs, b_budgets, b_runs, b_seed, b_out, b_jobs);
    if (*serve) return cmd_serve(s_config, s_port);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
