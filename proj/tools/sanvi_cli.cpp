// Command-line front end: simulate, estimate, cluster, bench.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sanvi/experiment.hpp"

namespace {

struct FlagValues {
  std::string scenario;
  std::vector<std::size_t> n;
  std::vector<std::string> estimators;
  std::string config;
  double tau = 0.0;
  double proposal_sd = 0.0;
};

void add_common(CLI::App* cmd, sanvi::RunConfig& cfg, FlagValues& flags) {
  cmd->add_option("--scenario", flags.scenario, "sbm5, dcsbm2, curve2d or curve3d");
  cmd->add_option("--n", flags.n, "sample sizes, comma-separated")->delimiter(',');
  cmd->add_option("--reps", cfg.reps, "replications per sample size");
  cmd->add_option("--estimators", flags.estimators, "subset of ase,ose,be,sanvi,mesle")
      ->delimiter(',');
  cmd->add_option("--d", cfg.d, "embedding dimension (0: scenario default)");
  cmd->add_option("--seed", cfg.seed, "master seed");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--config", flags.config, "key = value file; overrides flags");
  cmd->add_option("--input", cfg.input, "edge list");
  cmd->add_option("--labels", cfg.labels, "label file: node_id class_int");
  cmd->add_option("--tau", flags.tau, "truncation level (default min(0.001, e^1.5/n))");
  cmd->add_option("--alpha0", cfg.vi.alpha0);
  cmd->add_option("--beta1", cfg.vi.beta1);
  cmd->add_option("--beta2", cfg.vi.beta2);
  cmd->add_option("--batch", cfg.vi.batch, "Monte Carlo draws per VI iteration");
  cmd->add_option("--max-iters", cfg.vi.max_iters);
  cmd->add_option("--chain-length", cfg.chain.length);
  cmd->add_option("--thin", cfg.chain.thin);
  cmd->add_option("--burn-in", cfg.chain.burn_in, "in thinned draws");
  cmd->add_option("--target-accept", cfg.chain.target_accept);
  cmd->add_option("--proposal-sd", flags.proposal_sd, "fixed random-walk sd (default: tuned)");
  cmd->add_flag("--dump-draws", cfg.dump_draws, "write kept MCMC draws");
  cmd->add_flag("--self-loops", cfg.self_loops, "sample diagonal entries of simulated graphs");
  cmd->add_option("--threads", cfg.threads, "worker threads (0: all cores)");
}

void finish_config(CLI::App* cmd, sanvi::RunConfig& cfg, const FlagValues& flags) {
  if (!flags.scenario.empty()) cfg.scenario = sanvi::parse_scenario_kind(flags.scenario);
  if (!flags.n.empty()) cfg.n_list = flags.n;
  if (!flags.estimators.empty()) {
    cfg.estimators.clear();
    for (const auto& e : flags.estimators) cfg.estimators.push_back(sanvi::parse_estimator(e));
  }
  if (cmd->count("--tau")) cfg.tau = flags.tau;
  if (cmd->count("--proposal-sd")) cfg.chain.proposal_sd = flags.proposal_sd;
  if (!flags.config.empty()) sanvi::apply_config_file(flags.config, cfg);
  cfg.command = sanvi::parse_command(cmd->get_name());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent position estimation for generalized random dot product graphs"};
  app.require_subcommand(1);

  sanvi::RunConfig cfg;
  FlagValues flags;
  std::vector<CLI::App*> commands{
      app.add_subcommand("simulate", "Monte Carlo SSE study on a simulated scenario"),
      app.add_subcommand("estimate", "Embed a network from an edge list"),
      app.add_subcommand("cluster", "GMM clustering of embeddings scored by ARI"),
      app.add_subcommand("bench", "Wall-clock timing over a grid of n")};
  for (auto* cmd : commands) add_common(cmd, cfg, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* chosen = app.get_subcommands().front();
    finish_config(chosen, cfg, flags);
    switch (cfg.command) {
      case sanvi::Command::simulate: {
        const auto report = sanvi::run_simulate(cfg);
        sanvi::write_summary_csv(report, cfg.scenario, std::cout);
        for (const auto& c : report.cells)
          if (!c.ok)
            std::cerr << "n=" << c.n << " rep=" << c.rep << " " << sanvi::to_string(c.estimator)
                      << ": " << c.error << '\n';
        return report.failures() == 0 ? 0 : 1;
      }
      case sanvi::Command::estimate:
        return sanvi::run_estimate(cfg, std::cerr) == 0 ? 0 : 1;
      case sanvi::Command::cluster: {
        const auto report = sanvi::run_cluster(cfg);
        std::cout << sanvi::cluster_json(report);
        for (const auto& r : report.rows)
          if (!r.ok) return 1;
        return 0;
      }
      case sanvi::Command::bench: {
        const auto report = sanvi::run_bench(cfg);
        std::cout << "estimator,c0,c1,c2,r_squared\n";
        for (const auto& f : report.fits)
          std::cout << sanvi::to_string(f.estimator) << ',' << f.c0 << ',' << f.c1 << ','
                    << f.c2 << ',' << f.r_squared << '\n';
        return report.failures() == 0 ? 0 : 1;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
