#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sanvi/experiment.hpp"

using namespace sanvi;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sanvi_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(path));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream cells_in(line);
    for (std::string cell; std::getline(cells_in, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Drops the named column from every row.
std::vector<std::vector<std::string>> without_column(std::vector<std::vector<std::string>> rows,
                                                     const std::string& name) {
  const auto& header = rows.front();
  const auto col = static_cast<std::size_t>(
      std::find(header.begin(), header.end(), name) - header.begin());
  for (auto& row : rows)
    if (col < row.size()) row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
  return rows;
}

// Two blocks of `half` vertices; every probability stays well away from 0 so
// the surrogate likelihood remains a faithful stand-in for the Bernoulli one.
void write_two_block_network(const fs::path& edges, const fs::path& labels, int half,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution inside(0.6), across(0.15);
  std::ofstream e(edges), l(labels);
  e << "# two blocks\n";
  for (int i = 0; i < 2 * half; ++i) {
    l << "v" << i << ' ' << (i < half ? 0 : 1) << '\n';
    for (int j = i + 1; j < 2 * half; ++j) {
      const bool same = (i < half) == (j < half);
      if (same ? inside(rng) : across(rng)) e << "v" << i << " v" << j << '\n';
    }
  }
}

}  // namespace

TEST_CASE("command and estimator names") {
  for (Command c : {Command::simulate, Command::estimate, Command::cluster, Command::bench})
    CHECK(parse_command(to_string(c)) == c);
  for (Estimator e : {Estimator::ase, Estimator::ose, Estimator::be, Estimator::sanvi, Estimator::mesle})
    CHECK(parse_estimator(to_string(e)) == e);
  CHECK_THROWS_AS(parse_command("plot"), std::invalid_argument);
  CHECK_THROWS_AS(parse_estimator("mle"), std::invalid_argument);
}

TEST_CASE("config file round trip") {
  RunConfig cfg;
  cfg.command = Command::bench;
  cfg.scenario = ScenarioKind::dcsbm2;
  cfg.n_list = {300, 1000};
  cfg.reps = 7;
  cfg.estimators = {Estimator::sanvi, Estimator::mesle};
  cfg.d = 3;
  cfg.seed = 42;
  cfg.out = "some/dir";
  cfg.tau = 0.002;
  cfg.vi.alpha0 = 0.02;
  cfg.vi.beta1 = 0.1;
  cfg.vi.beta2 = 0.9;
  cfg.vi.batch = 4;
  cfg.vi.max_iters = 321;
  cfg.chain.length = 2000;
  cfg.chain.thin = 4;
  cfg.chain.burn_in = 100;
  cfg.chain.target_accept = 0.3;
  cfg.chain.proposal_sd = 0.05;
  cfg.dump_draws = true;
  cfg.self_loops = true;
  cfg.threads = 3;

  std::ostringstream first;
  write_config(cfg, first);
  RunConfig parsed;
  std::istringstream in(first.str());
  apply_config(in, parsed);
  std::ostringstream second;
  write_config(parsed, second);
  CHECK(first.str() == second.str());
  CHECK(parsed.n_list == cfg.n_list);
  CHECK(parsed.estimators == cfg.estimators);
  CHECK(parsed.tau == cfg.tau);
  CHECK(parsed.chain.proposal_sd == cfg.chain.proposal_sd);
  CHECK(parsed.self_loops);
}

TEST_CASE("config errors name the line") {
  RunConfig cfg;
  std::istringstream unknown("# comment\n\nreps = 3\ncolour = red\n");
  try {
    apply_config(unknown, cfg);
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  std::istringstream bad_value("reps = many\n");
  CHECK_THROWS_AS(apply_config(bad_value, cfg), std::invalid_argument);
  std::istringstream no_equals("reps 3\n");
  CHECK_THROWS_AS(apply_config(no_equals, cfg), std::invalid_argument);
}

TEST_CASE("config validation") {
  RunConfig cfg;
  cfg.reps = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RunConfig{};
  cfg.estimators.clear();
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = RunConfig{};
  cfg.command = Command::estimate;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // no input
  cfg = RunConfig{};
  CHECK(cfg.dimension() == 2);
  cfg.scenario = ScenarioKind::curve3d;
  CHECK(cfg.dimension() == 3);
}

TEST_CASE("replication seeds depend on every coordinate") {
  const std::uint64_t base = rep_seed(1, ScenarioKind::sbm5, 1000, 0);
  CHECK(rep_seed(1, ScenarioKind::sbm5, 1000, 0) == base);
  CHECK(rep_seed(2, ScenarioKind::sbm5, 1000, 0) != base);
  CHECK(rep_seed(1, ScenarioKind::dcsbm2, 1000, 0) != base);
  CHECK(rep_seed(1, ScenarioKind::sbm5, 3000, 0) != base);
  CHECK(rep_seed(1, ScenarioKind::sbm5, 1000, 1) != base);
}

TEST_CASE("simulate: one replication, one estimator") {
  RunConfig cfg;
  cfg.n_list = {200};
  cfg.reps = 1;
  cfg.estimators = {Estimator::ase};
  cfg.seed = 5;
  cfg.out = fresh_dir("simulate_one").string();
  const SimulationReport report = run_simulate(cfg);
  REQUIRE(report.cells.size() == 1);
  CHECK(report.cells[0].ok);
  CHECK(report.cells[0].sse > 0);
  CHECK(report.failures() == 0);
  REQUIRE(report.summary.size() == 1);
  CHECK(report.summary[0].reps_ok == 1);
  CHECK(report.summary[0].mean_sse == report.cells[0].sse);

  const auto rows = read_csv(fs::path(cfg.out) / "results.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"scenario", "n", "rep", "estimator", "seed", "sse",
                                            "seconds", "status", "error"});
  CHECK(rows[1][0] == "sbm5");
  CHECK(rows[1][1] == "200");
  CHECK(rows[1][4] == std::to_string(report.cells[0].seed));
  CHECK(read_csv(fs::path(cfg.out) / "summary.csv").size() == 2);
  CHECK(fs::exists(fs::path(cfg.out) / "paired_t.csv"));
  CHECK(fs::exists(fs::path(cfg.out) / "config.txt"));
}

TEST_CASE("simulate: identical outputs for a fixed seed, apart from timings") {
  RunConfig cfg;
  cfg.n_list = {150, 200};
  cfg.reps = 3;
  cfg.estimators = {Estimator::ase, Estimator::ose, Estimator::mesle};
  cfg.seed = 6;
  cfg.out = fresh_dir("simulate_a").string();
  cfg.threads = 1;
  run_simulate(cfg);
  const fs::path first = cfg.out;
  cfg.out = fresh_dir("simulate_b").string();
  cfg.threads = 3;
  const SimulationReport report = run_simulate(cfg);
  CHECK(report.cells.size() == 18);
  CHECK(without_column(read_csv(first / "results.csv"), "seconds") ==
        without_column(read_csv(fs::path(cfg.out) / "results.csv"), "seconds"));
  CHECK(without_column(read_csv(first / "summary.csv"), "mean_seconds") ==
        without_column(read_csv(fs::path(cfg.out) / "summary.csv"), "mean_seconds"));
  CHECK(read_file(first / "paired_t.csv") == read_file(fs::path(cfg.out) / "paired_t.csv"));
  // Paired tests for every pair of estimators at every n.
  CHECK(report.paired.size() == 2 * 3);
}

TEST_CASE("estimate: tiny edge list") {
  const fs::path dir = fresh_dir("estimate");
  {
    std::ofstream edges(dir / "tiny.txt");
    edges << "1 2\n2 3\n3 4\n4 5\n5 1\n1 3\n";
  }
  RunConfig cfg;
  cfg.command = Command::estimate;
  cfg.input = (dir / "tiny.txt").string();
  cfg.estimators = {Estimator::ase};
  cfg.d = 2;
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  CHECK(run_estimate(cfg, log) == 0);
  const auto rows = read_csv(dir / "out" / "embedding_ase.csv");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"x1", "x2"});
  for (std::size_t r = 1; r < rows.size(); ++r) CHECK(rows[r].size() == 2);
  CHECK(read_csv(dir / "out" / "nodes.csv").size() == 6);
  CHECK(fs::exists(dir / "out" / "edges.txt"));
}

TEST_CASE("estimate: SANVI posterior carries the precision estimate") {
  const fs::path dir = fresh_dir("estimate_sanvi");
  write_two_block_network(dir / "edges.txt", dir / "labels.txt", 30, 1);
  RunConfig cfg;
  cfg.command = Command::estimate;
  cfg.input = (dir / "edges.txt").string();
  cfg.estimators = {Estimator::sanvi, Estimator::be};
  cfg.vi.max_iters = 100;
  cfg.chain.length = 400;
  cfg.chain.burn_in = 100;
  cfg.dump_draws = true;
  cfg.out = (dir / "out").string();
  std::ostringstream log;
  CHECK(run_estimate(cfg, log) == 0);
  const auto posterior = read_csv(dir / "out" / "posterior_sanvi.csv");
  CHECK(posterior[0] == std::vector<std::string>{"vertex", "mu1", "mu2", "L11", "L21", "L22",
                                                 "G11", "G21", "G22"});
  CHECK(posterior.size() == 61);
  CHECK(read_csv(dir / "out" / "chains_be.csv").size() == 61);
  CHECK(read_csv(dir / "out" / "draws_be.csv").size() == 1 + 60 * 100);
}

TEST_CASE("estimate: unreadable input is an error") {
  RunConfig cfg;
  cfg.command = Command::estimate;
  cfg.input = "/nonexistent/edges.txt";
  cfg.out = fresh_dir("estimate_missing").string();
  std::ostringstream log;
  CHECK_THROWS(run_estimate(cfg, log));
}

TEST_CASE("cluster: two clear blocks, labels permuted") {
  const fs::path dir = fresh_dir("cluster");
  write_two_block_network(dir / "edges.txt", dir / "labels.txt", 100, 2);
  RunConfig cfg;
  cfg.command = Command::cluster;
  cfg.input = (dir / "edges.txt").string();
  cfg.labels = (dir / "labels.txt").string();
  cfg.estimators = {Estimator::ase, Estimator::mesle};
  cfg.out = (dir / "out").string();
  const ClusterReport report = run_cluster(cfg);
  CHECK(report.n == 200);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    CHECK(row.ok);
    CHECK(row.ari == 1.0);
  }

  {
    std::ifstream in(dir / "labels.txt");
    std::ofstream out(dir / "swapped.txt");
    std::string id;
    int label = 0;
    while (in >> id >> label) out << id << ' ' << (label == 0 ? 7 : 3) << '\n';
  }
  cfg.labels = (dir / "swapped.txt").string();
  cfg.out.clear();
  const ClusterReport swapped = run_cluster(cfg);
  CHECK(swapped.rows[0].ari == report.rows[0].ari);

  const auto doc = nlohmann::json::parse(read_file(dir / "out" / "cluster.json"));
  CHECK(doc["n"] == 200);
  CHECK(doc["results"].size() == 2);
  CHECK(doc["results"][0]["estimator"] == "ase");
  CHECK(doc["results"][0]["ari"] == 1.0);
}

TEST_CASE("cluster: missing labels are an error") {
  const fs::path dir = fresh_dir("cluster_nolabels");
  write_two_block_network(dir / "edges.txt", dir / "labels.txt", 10, 3);
  { std::ofstream empty(dir / "empty.txt"); }
  RunConfig cfg;
  cfg.command = Command::cluster;
  cfg.input = (dir / "edges.txt").string();
  cfg.labels = (dir / "empty.txt").string();
  CHECK_THROWS_AS(run_cluster(cfg), std::invalid_argument);
}

TEST_CASE("quadratic fit") {
  const std::vector<double> n{300, 1000, 3000, 5000};
  std::vector<double> seconds;
  for (double v : n) seconds.push_back(0.5 + 2e-3 * v + 3e-7 * v * v);
  const QuadraticFit fit = fit_quadratic(Estimator::sanvi, n, seconds);
  CHECK(fit.c0 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(fit.c1 == doctest::Approx(2e-3).epsilon(1e-8));
  CHECK(fit.c2 == doctest::Approx(3e-7).epsilon(1e-8));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.points == 4);
  CHECK(std::isnan(fit_quadratic(Estimator::ase, {300, 300}, {1.0, 2.0}).r_squared));
}

TEST_CASE("bench: single cell") {
  RunConfig cfg;
  cfg.command = Command::bench;
  cfg.n_list = {150};
  cfg.reps = 1;
  cfg.estimators = {Estimator::ase};
  cfg.out = fresh_dir("bench").string();
  const BenchReport report = run_bench(cfg);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].ok);
  CHECK(report.rows[0].seconds >= 0);
  CHECK(report.failures() == 0);
  CHECK(read_csv(fs::path(cfg.out) / "timing.csv").size() == 2);
  CHECK(fs::exists(fs::path(cfg.out) / "timing_fit.csv"));
}
