#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sanvi/graph_model.hpp"
#include "sanvi/mcmc.hpp"
#include "sanvi/vi.hpp"

namespace sanvi {

enum class Command { simulate, estimate, cluster, bench };
enum class Estimator { ase, ose, be, sanvi, mesle };

Command parse_command(std::string_view name);
std::string_view to_string(Command command);
Estimator parse_estimator(std::string_view name);
std::string_view to_string(Estimator estimator);

struct RunConfig {
  Command command = Command::simulate;
  ScenarioKind scenario = ScenarioKind::sbm5;
  std::string input;   // edge list for estimate / cluster
  std::string labels;  // label file for cluster
  std::vector<std::size_t> n_list{1000};
  int reps = 100;
  std::vector<Estimator> estimators{Estimator::ase, Estimator::ose, Estimator::be,
                                    Estimator::sanvi};
  int d = 0;  // 0: the scenario's dimension (simulate, bench) or 2 (estimate, cluster)
  std::uint64_t seed = 20240101;
  std::string out;  // output directory; empty writes nothing
  std::optional<double> tau;
  SanviOptions vi;
  ChainSpec chain;
  bool dump_draws = false;
  /// Simulated graphs sample A_ii too when set; hollow otherwise.
  bool self_loops = false;
  unsigned threads = 1;

  /// Throws std::invalid_argument.
  void validate() const;
  int dimension() const;
};

/// Applies "key = value" lines ('#' comments, blank lines allowed) on top of
/// `cfg`. Keys: command scenario input labels n reps estimators d seed out tau
/// alpha0 beta1 beta2 batch max_iters chain_length thin burn_in target_accept
/// proposal_sd dump_draws self_loops threads. Lists are comma-separated. Throws
/// std::invalid_argument naming the line on unknown keys or bad values.
void apply_config(std::istream& in, RunConfig& cfg);
void apply_config_file(const std::filesystem::path& path, RunConfig& cfg);
/// Writes every key, so apply_config on the output reproduces `cfg`.
void write_config(const RunConfig& cfg, std::ostream& out);

/// Seed of replication `rep` at size n: depends only on (master, scenario, n, rep).
std::uint64_t rep_seed(std::uint64_t master, ScenarioKind scenario, std::size_t n, int rep);

struct EstimatorFit {
  Eigen::MatrixXd X_hat;
  std::optional<SanviResult> sanvi;
  std::optional<BayesResult> bayes;
  double seconds = 0.0;  // the estimator call, spectral step included
};

/// Runs one estimator from scratch on A (eigendecomposition included).
EstimatorFit fit_estimator(Estimator estimator, const Graph& A, int d, const RunConfig& cfg,
                           std::uint64_t seed, unsigned threads = 1);

struct CellResult {
  ScenarioKind scenario = ScenarioKind::sbm5;
  std::size_t n = 0;
  int rep = 0;
  Estimator estimator = Estimator::ase;
  std::uint64_t seed = 0;
  double sse = 0.0;
  double seconds = 0.0;
  bool ok = true;
  std::string error;
};

struct SummaryRow {
  std::size_t n = 0;
  Estimator estimator = Estimator::ase;
  int reps_ok = 0;
  int reps_failed = 0;
  double mean_sse = 0.0;
  double se_sse = 0.0;  // sample sd / sqrt(reps_ok)
  double mean_seconds = 0.0;
};

struct PairedRow {
  std::size_t n = 0;
  Estimator a = Estimator::ase;
  Estimator b = Estimator::ase;
  int pairs = 0;
  double t_stat = 0.0;
  double p_value = 1.0;  // NaN when the test is undefined
};

struct SimulationReport {
  std::vector<CellResult> cells;  // sorted by (n, rep, estimator order in cfg)
  std::vector<SummaryRow> summary;
  std::vector<PairedRow> paired;
  int failures() const;
};

/// Samples each (n, rep) replication, fits every estimator and records the
/// Procrustes SSE against the true latent positions. Failures are recorded
/// per cell. When cfg.out is set, writes results.csv, summary.csv and
/// paired_t.csv there.
SimulationReport run_simulate(const RunConfig& cfg);

void write_results_csv(const SimulationReport& report, std::ostream& out);
void write_summary_csv(const SimulationReport& report, ScenarioKind scenario, std::ostream& out);
void write_paired_csv(const SimulationReport& report, ScenarioKind scenario, std::ostream& out);

/// Ingests cfg.input and writes embedding_<est>.csv per estimator (plus
/// posterior_sanvi.csv, chains_be.csv and optionally draws_be.csv), nodes.csv
/// and edges.txt into cfg.out. Returns the number of failed estimators.
int run_estimate(const RunConfig& cfg, std::ostream& log);

struct ClusterRow {
  Estimator estimator = Estimator::ase;
  double ari = 0.0;
  double seconds = 0.0;
  bool ok = true;
  std::string error;
};

struct ClusterReport {
  std::size_t n = 0;
  std::size_t unit_entries = 0;
  std::vector<ClusterRow> rows;
};

/// Ingests cfg.input with labels cfg.labels, embeds with each estimator,
/// fits a Gaussian mixture with one component per label class and scores the
/// hard assignment by ARI. Writes cluster.json into cfg.out when set.
ClusterReport run_cluster(const RunConfig& cfg);
std::string cluster_json(const ClusterReport& report);

struct BenchRow {
  std::size_t n = 0;
  int rep = 0;
  Estimator estimator = Estimator::ase;
  double seconds = 0.0;
  bool ok = true;
};

struct QuadraticFit {
  Estimator estimator = Estimator::ase;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // seconds ~ c0 + c1 n + c2 n^2
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares quadratic in n; R^2 is NaN with fewer than 3 distinct n.
QuadraticFit fit_quadratic(Estimator estimator, const std::vector<double>& n,
                           const std::vector<double>& seconds);

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<QuadraticFit> fits;
  int failures() const;
};

/// Times every estimator on the scenario for every n and rep; writes
/// timing.csv and timing_fit.csv into cfg.out when set.
BenchReport run_bench(const RunConfig& cfg);

}  // namespace sanvi
