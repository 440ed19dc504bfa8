#include "sanvi/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sanvi/esl.hpp"
#include "sanvi/eval.hpp"
#include "sanvi/ingest.hpp"
#include "sanvi/one_step.hpp"
#include "sanvi/parallel.hpp"
#include "sanvi/rng.hpp"
#include "sanvi/spectral.hpp"

namespace sanvi {

namespace {

constexpr std::uint64_t kGraphTag = 1;
constexpr std::uint64_t kEstimatorTag = 2;
constexpr std::uint64_t kGmmTag = 3;

struct NamedEstimator {
  Estimator value;
  std::string_view name;
};
constexpr NamedEstimator kEstimators[] = {{Estimator::ase, "ase"},
                                          {Estimator::ose, "ose"},
                                          {Estimator::be, "be"},
                                          {Estimator::sanvi, "sanvi"},
                                          {Estimator::mesle, "mesle"}};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) parts.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

template <typename T>
T parse_number(const std::string& text) {
  std::istringstream in(text);
  T value{};
  if (!(in >> value) || !(in >> std::ws).eof())
    throw std::invalid_argument("cannot parse '" + text + "' as a number");
  return value;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("cannot parse '" + text + "' as a boolean");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Eigen::MatrixXd mesle_all(const Graph& A, const Embedding& signed_emb, double tau,
                          unsigned threads) {
  Eigen::MatrixXd out(signed_emb.X.rows(), signed_emb.X.cols());
  parallel_for(A.n(), threads, [&](std::size_t i) {
    try {
      const EslContext ctx(signed_emb.X, A.row(i), tau);
      out.row(static_cast<Eigen::Index>(i)) =
          mesle(ctx, static_cast<Eigen::Index>(i)).x_hat.transpose();
    } catch (const std::exception& e) {
      throw std::runtime_error("vertex " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

IngestedNetwork ingest_input(const RunConfig& cfg) {
  std::ifstream edges(cfg.input);
  if (!edges) throw std::runtime_error("cannot open edge list " + cfg.input);
  RawNetwork raw = parse_edge_list(edges);
  if (!cfg.labels.empty()) {
    std::ifstream labels(cfg.labels);
    if (!labels) throw std::runtime_error("cannot open label file " + cfg.labels);
    raw.labels = parse_labels(labels);
  }
  return to_undirected_lcc(raw);
}

DiagonalPolicy diagonal_policy(const RunConfig& cfg) {
  return cfg.self_loops ? DiagonalPolicy::sample : DiagonalPolicy::zero;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "simulate") return Command::simulate;
  if (name == "estimate") return Command::estimate;
  if (name == "cluster") return Command::cluster;
  if (name == "bench") return Command::bench;
  throw std::invalid_argument("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::estimate: return "estimate";
    case Command::cluster: return "cluster";
    case Command::bench: return "bench";
  }
  return "?";
}

Estimator parse_estimator(std::string_view name) {
  for (const auto& e : kEstimators)
    if (e.name == name) return e.value;
  throw std::invalid_argument("unknown estimator '" + std::string(name) +
                              "' (expected ase, ose, be, sanvi or mesle)");
}

std::string_view to_string(Estimator estimator) {
  for (const auto& e : kEstimators)
    if (e.value == estimator) return e.name;
  return "?";
}

void RunConfig::validate() const {
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (estimators.empty()) throw std::invalid_argument("no estimators selected");
  for (std::size_t i = 0; i < estimators.size(); ++i)
    for (std::size_t j = i + 1; j < estimators.size(); ++j)
      if (estimators[i] == estimators[j])
        throw std::invalid_argument("estimator listed twice: " +
                                    std::string(to_string(estimators[i])));
  if (d < 0) throw std::invalid_argument("d must be nonnegative");
  if (command == Command::simulate || command == Command::bench) {
    if (n_list.empty()) throw std::invalid_argument("no sample sizes given");
    for (auto n : n_list)
      if (n < 2) throw std::invalid_argument("sample sizes must be at least 2");
  }
  if ((command == Command::estimate || command == Command::cluster) && input.empty())
    throw std::invalid_argument("an input edge list is required");
  if (command == Command::cluster && labels.empty())
    throw std::invalid_argument("cluster needs a label file");
  if (tau && !(*tau > 0.0 && *tau < 0.5)) throw std::invalid_argument("tau must lie in (0, 1/2)");
  if (vi.batch < 1) throw std::invalid_argument("batch must be positive");
  if (vi.max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
  if (!(vi.alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
  if (!(vi.beta1 >= 0.0 && vi.beta1 < 1.0) || !(vi.beta2 >= 0.0 && vi.beta2 < 1.0))
    throw std::invalid_argument("beta1 and beta2 must lie in [0, 1)");
  chain.validate();
}

int RunConfig::dimension() const {
  if (d > 0) return d;
  if (command == Command::simulate || command == Command::bench)
    return scenario_signature(scenario).d();
  return 2;
}

void apply_config(std::istream& in, RunConfig& cfg) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    const std::string where = "config line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    try {
      if (key == "command") cfg.command = parse_command(value);
      else if (key == "scenario") cfg.scenario = parse_scenario_kind(value);
      else if (key == "input") cfg.input = value;
      else if (key == "labels") cfg.labels = value;
      else if (key == "n") {
        cfg.n_list.clear();
        for (const auto& item : split_list(value))
          cfg.n_list.push_back(parse_number<std::size_t>(item));
      } else if (key == "reps") cfg.reps = parse_number<int>(value);
      else if (key == "estimators") {
        cfg.estimators.clear();
        for (const auto& item : split_list(value)) cfg.estimators.push_back(parse_estimator(item));
      } else if (key == "d") cfg.d = parse_number<int>(value);
      else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(value);
      else if (key == "out") cfg.out = value;
      else if (key == "tau") {
        if (value == "auto") cfg.tau.reset();
        else cfg.tau = parse_number<double>(value);
      } else if (key == "alpha0") cfg.vi.alpha0 = parse_number<double>(value);
      else if (key == "beta1") cfg.vi.beta1 = parse_number<double>(value);
      else if (key == "beta2") cfg.vi.beta2 = parse_number<double>(value);
      else if (key == "batch") cfg.vi.batch = parse_number<int>(value);
      else if (key == "max_iters") cfg.vi.max_iters = parse_number<int>(value);
      else if (key == "chain_length") cfg.chain.length = parse_number<int>(value);
      else if (key == "thin") cfg.chain.thin = parse_number<int>(value);
      else if (key == "burn_in") cfg.chain.burn_in = parse_number<int>(value);
      else if (key == "target_accept") cfg.chain.target_accept = parse_number<double>(value);
      else if (key == "proposal_sd") {
        if (value == "auto") cfg.chain.proposal_sd.reset();
        else cfg.chain.proposal_sd = parse_number<double>(value);
      } else if (key == "dump_draws") cfg.dump_draws = parse_bool(value);
      else if (key == "self_loops") cfg.self_loops = parse_bool(value);
      else if (key == "threads") cfg.threads = parse_number<unsigned>(value);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(where + e.what());
    }
  }
}

void apply_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  apply_config(in, cfg);
}

void write_config(const RunConfig& cfg, std::ostream& out) {
  auto join_n = [&] {
    std::string s;
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i)
      s += (i ? "," : "") + std::to_string(cfg.n_list[i]);
    return s;
  };
  auto join_est = [&] {
    std::string s;
    for (std::size_t i = 0; i < cfg.estimators.size(); ++i)
      s += (i ? "," : "") + std::string(to_string(cfg.estimators[i]));
    return s;
  };
  out << "command = " << to_string(cfg.command) << '\n'
      << "scenario = " << to_string(cfg.scenario) << '\n'
      << "input = " << cfg.input << '\n'
      << "labels = " << cfg.labels << '\n'
      << "n = " << join_n() << '\n'
      << "reps = " << cfg.reps << '\n'
      << "estimators = " << join_est() << '\n'
      << "d = " << cfg.d << '\n'
      << "seed = " << cfg.seed << '\n'
      << "out = " << cfg.out << '\n'
      << "tau = " << (cfg.tau ? format_double(*cfg.tau) : "auto") << '\n'
      << "alpha0 = " << format_double(cfg.vi.alpha0) << '\n'
      << "beta1 = " << format_double(cfg.vi.beta1) << '\n'
      << "beta2 = " << format_double(cfg.vi.beta2) << '\n'
      << "batch = " << cfg.vi.batch << '\n'
      << "max_iters = " << cfg.vi.max_iters << '\n'
      << "chain_length = " << cfg.chain.length << '\n'
      << "thin = " << cfg.chain.thin << '\n'
      << "burn_in = " << cfg.chain.burn_in << '\n'
      << "target_accept = " << format_double(cfg.chain.target_accept) << '\n'
      << "proposal_sd = "
      << (cfg.chain.proposal_sd ? format_double(*cfg.chain.proposal_sd) : "auto") << '\n'
      << "dump_draws = " << (cfg.dump_draws ? "true" : "false") << '\n'
      << "self_loops = " << (cfg.self_loops ? "true" : "false") << '\n'
      << "threads = " << cfg.threads << '\n';
}

std::uint64_t rep_seed(std::uint64_t master, ScenarioKind scenario, std::size_t n, int rep) {
  return stream_key(master, {static_cast<std::uint64_t>(scenario) + 1, n,
                             static_cast<std::uint64_t>(rep)});
}

EstimatorFit fit_estimator(Estimator estimator, const Graph& A, int d, const RunConfig& cfg,
                           std::uint64_t seed, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  const double tau = cfg.tau.value_or(default_tau(A.n()));
  const EigenPairs eig = top_d_eigen(A, d);
  EstimatorFit fit;
  switch (estimator) {
    case Estimator::ase:
      fit.X_hat = ase(eig).X;
      break;
    case Estimator::ose:
      fit.X_hat = ose(A, ase(eig), signed_ase(eig), threads);
      break;
    case Estimator::mesle:
      fit.X_hat = mesle_all(A, signed_ase(eig), tau, threads);
      break;
    case Estimator::sanvi: {
      SanviOptions opts = cfg.vi;
      opts.seed = seed;
      opts.tau = tau;
      fit.sanvi = sanvi_all(A, ase(eig), signed_ase(eig), PriorSpec::improper_uniform(), opts,
                            threads);
      fit.X_hat = fit.sanvi->X_hat;
      break;
    }
    case Estimator::be: {
      ChainSpec spec = cfg.chain;
      spec.seed = seed;
      spec.keep_draws = cfg.dump_draws;
      fit.bayes = be_all(A, signed_ase(eig), PriorSpec::improper_uniform(), spec, tau, threads);
      fit.X_hat = fit.bayes->X_hat;
      break;
    }
  }
  fit.seconds = seconds_since(start);
  return fit;
}

int SimulationReport::failures() const {
  return static_cast<int>(std::count_if(cells.begin(), cells.end(),
                                        [](const CellResult& c) { return !c.ok; }));
}

SimulationReport run_simulate(const RunConfig& cfg) {
  RunConfig local = cfg;
  local.command = Command::simulate;
  local.validate();
  const int d = local.dimension();
  const std::size_t n_estimators = local.estimators.size();
  const std::size_t units = local.n_list.size() * static_cast<std::size_t>(local.reps);

  std::vector<CellResult> cells(units * n_estimators);
  parallel_for(units, local.threads, [&](std::size_t u) {
    const std::size_t n = local.n_list[u / static_cast<std::size_t>(local.reps)];
    const int rep = static_cast<int>(u % static_cast<std::size_t>(local.reps));
    const std::uint64_t seed = rep_seed(local.seed, local.scenario, n, rep);
    for (std::size_t e = 0; e < n_estimators; ++e) {
      CellResult& cell = cells[u * n_estimators + e];
      cell.scenario = local.scenario;
      cell.n = n;
      cell.rep = rep;
      cell.estimator = local.estimators[e];
      cell.seed = seed;
    }
    LatentConfig truth;
    Graph A;
    try {
      truth = make_scenario({local.scenario, n, seed});
      A = sample_grdpg(truth, stream_key(seed, {kGraphTag}), diagonal_policy(local));
    } catch (const std::exception& ex) {
      for (std::size_t e = 0; e < n_estimators; ++e) {
        cells[u * n_estimators + e].ok = false;
        cells[u * n_estimators + e].error = std::string("sampling failed: ") + ex.what();
      }
      return;
    }
    for (std::size_t e = 0; e < n_estimators; ++e) {
      CellResult& cell = cells[u * n_estimators + e];
      try {
        const auto est_seed =
            stream_key(seed, {kEstimatorTag, static_cast<std::uint64_t>(cell.estimator)});
        const EstimatorFit fit = fit_estimator(cell.estimator, A, d, local, est_seed, 1);
        cell.seconds = fit.seconds;
        cell.sse = procrustes_sse(fit.X_hat, truth.X0).sse;
        if (!std::isfinite(cell.sse)) throw std::runtime_error("non-finite SSE");
      } catch (const std::exception& ex) {
        cell.ok = false;
        cell.error = ex.what();
      }
    }
  });

  SimulationReport report;
  report.cells = std::move(cells);

  for (std::size_t n : local.n_list) {
    std::map<Estimator, std::vector<double>> by_rep;
    for (Estimator est : local.estimators) {
      SummaryRow row;
      row.n = n;
      row.estimator = est;
      std::vector<double> sse(static_cast<std::size_t>(local.reps),
                              std::numeric_limits<double>::quiet_NaN());
      double seconds = 0.0;
      for (const auto& c : report.cells) {
        if (c.n != n || c.estimator != est) continue;
        if (!c.ok) {
          ++row.reps_failed;
          continue;
        }
        ++row.reps_ok;
        sse[static_cast<std::size_t>(c.rep)] = c.sse;
        seconds += c.seconds;
      }
      double sum = 0.0;
      for (double v : sse)
        if (!std::isnan(v)) sum += v;
      if (row.reps_ok > 0) {
        row.mean_sse = sum / row.reps_ok;
        row.mean_seconds = seconds / row.reps_ok;
        double ss = 0.0;
        for (double v : sse)
          if (!std::isnan(v)) ss += (v - row.mean_sse) * (v - row.mean_sse);
        row.se_sse = row.reps_ok > 1 ? std::sqrt(ss / (row.reps_ok - 1) / row.reps_ok) : 0.0;
      } else {
        row.mean_sse = row.se_sse = row.mean_seconds = std::numeric_limits<double>::quiet_NaN();
      }
      report.summary.push_back(row);
      by_rep[est] = std::move(sse);
    }
    for (std::size_t i = 0; i < local.estimators.size(); ++i) {
      for (std::size_t j = i + 1; j < local.estimators.size(); ++j) {
        PairedRow row;
        row.n = n;
        row.a = local.estimators[i];
        row.b = local.estimators[j];
        std::vector<double> a, b;
        const auto& va = by_rep[row.a];
        const auto& vb = by_rep[row.b];
        for (std::size_t r = 0; r < va.size(); ++r)
          if (!std::isnan(va[r]) && !std::isnan(vb[r])) {
            a.push_back(va[r]);
            b.push_back(vb[r]);
          }
        row.pairs = static_cast<int>(a.size());
        try {
          const TTestResult t = paired_t_test(a, b);
          row.t_stat = t.t_stat;
          row.p_value = t.p_value;
        } catch (const std::invalid_argument&) {
          row.t_stat = row.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        report.paired.push_back(row);
      }
    }
  }

  if (!local.out.empty()) {
    std::filesystem::create_directories(local.out);
    const std::filesystem::path dir(local.out);
    std::ostringstream results, summary, paired, config;
    write_results_csv(report, results);
    write_summary_csv(report, local.scenario, summary);
    write_paired_csv(report, local.scenario, paired);
    write_config(local, config);
    write_file(dir / "results.csv", results.str());
    write_file(dir / "summary.csv", summary.str());
    write_file(dir / "paired_t.csv", paired.str());
    write_file(dir / "config.txt", config.str());
  }
  return report;
}

void write_results_csv(const SimulationReport& report, std::ostream& out) {
  out << "scenario,n,rep,estimator,seed,sse,seconds,status,error\n" << std::setprecision(17);
  for (const auto& c : report.cells) {
    std::string error = c.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << to_string(c.scenario) << ',' << c.n << ',' << c.rep << ',' << to_string(c.estimator)
        << ',' << c.seed << ',';
    if (c.ok)
      out << c.sse << ',' << c.seconds << ",ok,";
    else
      out << ",," << "failed," << error;
    out << '\n';
  }
}

void write_summary_csv(const SimulationReport& report, ScenarioKind scenario, std::ostream& out) {
  out << "scenario,n,estimator,reps_ok,reps_failed,mean_sse,se_sse,mean_seconds\n"
      << std::setprecision(17);
  for (const auto& r : report.summary)
    out << to_string(scenario) << ',' << r.n << ',' << to_string(r.estimator) << ','
        << r.reps_ok << ',' << r.reps_failed << ',' << r.mean_sse << ',' << r.se_sse << ','
        << r.mean_seconds << '\n';
}

void write_paired_csv(const SimulationReport& report, ScenarioKind scenario, std::ostream& out) {
  out << "scenario,n,estimator_a,estimator_b,pairs,t_stat,p_value\n" << std::setprecision(17);
  for (const auto& r : report.paired)
    out << to_string(scenario) << ',' << r.n << ',' << to_string(r.a) << ',' << to_string(r.b)
        << ',' << r.pairs << ',' << r.t_stat << ',' << r.p_value << '\n';
}

int run_estimate(const RunConfig& cfg, std::ostream& log) {
  RunConfig local = cfg;
  local.command = Command::estimate;
  local.validate();
  const IngestedNetwork net = ingest_input(local);
  const int d = local.dimension();
  log << "ingested " << net.graph.n() << " vertices, " << net.graph.unit_entries()
      << " unit entries, " << net.self_loops << " self-loops\n";

  std::filesystem::path dir(local.out.empty() ? "." : local.out);
  std::filesystem::create_directories(dir);
  {
    std::ostringstream nodes, edges;
    write_label_csv(net, nodes);
    write_canonical_edges(net, edges);
    write_file(dir / "nodes.csv", nodes.str());
    write_file(dir / "edges.txt", edges.str());
  }

  int failures = 0;
  for (Estimator est : local.estimators) {
    try {
      const auto seed = stream_key(local.seed, {kEstimatorTag, static_cast<std::uint64_t>(est)});
      const EstimatorFit fit = fit_estimator(est, net.graph, d, local, seed, local.threads);
      const std::string name(to_string(est));
      std::ostringstream emb;
      write_embedding_csv(fit.X_hat, emb);
      write_file(dir / ("embedding_" + name + ".csv"), emb.str());
      if (fit.sanvi) {
        std::ostringstream post;
        write_posterior_csv(fit.sanvi->posteriors, post);
        write_file(dir / "posterior_sanvi.csv", post.str());
      }
      if (fit.bayes) {
        std::ostringstream chains;
        chains << "vertex,acceptance_rate,proposal_sd,draws_kept\n" << std::setprecision(17);
        for (std::size_t i = 0; i < fit.bayes->chains.size(); ++i) {
          const auto& c = fit.bayes->chains[i];
          chains << i << ',' << c.acceptance_rate << ',' << c.proposal_sd_used << ','
                 << c.draws_kept << '\n';
        }
        write_file(dir / "chains_be.csv", chains.str());
        if (local.dump_draws) {
          std::ostringstream draws;
          write_draws_csv(fit.bayes->chains, draws);
          write_file(dir / "draws_be.csv", draws.str());
        }
      }
      log << name << ": " << std::setprecision(4) << fit.seconds << " s\n";
    } catch (const std::exception& e) {
      ++failures;
      log << to_string(est) << " failed: " << e.what() << '\n';
    }
  }
  return failures;
}

ClusterReport run_cluster(const RunConfig& cfg) {
  RunConfig local = cfg;
  local.command = Command::cluster;
  local.validate();
  const IngestedNetwork net = ingest_input(local);
  const int d = local.dimension();

  std::vector<Eigen::Index> labeled;
  std::vector<int> truth;
  for (std::size_t i = 0; i < net.labels.size(); ++i)
    if (net.labels[i] != kMissingLabel) {
      labeled.push_back(static_cast<Eigen::Index>(i));
      truth.push_back(net.labels[i]);
    }
  if (truth.size() < 2) throw std::invalid_argument("fewer than two labeled vertices in the network");
  std::vector<int> classes = truth;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const int k = static_cast<int>(classes.size());

  ClusterReport report;
  report.n = net.graph.n();
  report.unit_entries = net.graph.unit_entries();
  for (Estimator est : local.estimators) {
    ClusterRow row;
    row.estimator = est;
    try {
      const auto seed = stream_key(local.seed, {kEstimatorTag, static_cast<std::uint64_t>(est)});
      const EstimatorFit fit = fit_estimator(est, net.graph, d, local, seed, local.threads);
      row.seconds = fit.seconds;
      GmmOptions gmm;
      gmm.threads = local.threads;
      const GmmModel model = gmm_fit(fit.X_hat, k, stream_key(local.seed, {kGmmTag}), gmm);
      const std::vector<int> assigned = gmm_assign(model, fit.X_hat);
      std::vector<int> predicted;
      predicted.reserve(labeled.size());
      for (Eigen::Index i : labeled) predicted.push_back(assigned[static_cast<std::size_t>(i)]);
      row.ari = adjusted_rand_index(predicted, truth);
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    report.rows.push_back(row);
  }

  if (!local.out.empty()) {
    std::filesystem::create_directories(local.out);
    write_file(std::filesystem::path(local.out) / "cluster.json", cluster_json(report));
  }
  return report;
}

std::string cluster_json(const ClusterReport& report) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json item{{"estimator", std::string(to_string(r.estimator))},
                        {"seconds", r.seconds}};
    if (r.ok)
      item["ari"] = r.ari;
    else
      item["error"] = r.error;
    results.push_back(std::move(item));
  }
  nlohmann::json doc{{"n", report.n}, {"unit_entries", report.unit_entries}, {"results", results}};
  return doc.dump(2) + "\n";
}

QuadraticFit fit_quadratic(Estimator estimator, const std::vector<double>& n,
                           const std::vector<double>& seconds) {
  if (n.size() != seconds.size()) throw std::invalid_argument("fit_quadratic: lengths differ");
  QuadraticFit fit;
  fit.estimator = estimator;
  fit.points = static_cast<int>(n.size());
  std::vector<double> distinct = n;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3) {
    fit.c0 = fit.c1 = fit.c2 = fit.r_squared = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  // Scaled design for conditioning: columns 1, n/s, (n/s)^2.
  const double scale = distinct.back();
  const auto m = static_cast<Eigen::Index>(n.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double v = n[static_cast<std::size_t>(i)] / scale;
    design.row(i) << 1.0, v, v * v;
    y[i] = seconds[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d beta = design.colPivHouseholderQr().solve(y);
  fit.c0 = beta[0];
  fit.c1 = beta[1] / scale;
  fit.c2 = beta[2] / (scale * scale);
  const double residual = (design * beta - y).squaredNorm();
  const double total = (y.array() - y.mean()).square().sum();
  fit.r_squared = total > 0.0 ? 1.0 - residual / total : std::numeric_limits<double>::quiet_NaN();
  return fit;
}

int BenchReport::failures() const {
  return static_cast<int>(
      std::count_if(rows.begin(), rows.end(), [](const BenchRow& r) { return !r.ok; }));
}

BenchReport run_bench(const RunConfig& cfg) {
  RunConfig local = cfg;
  local.command = Command::bench;
  local.validate();
  const int d = local.dimension();

  BenchReport report;
  for (std::size_t n : local.n_list) {
    for (int rep = 0; rep < local.reps; ++rep) {
      const std::uint64_t seed = rep_seed(local.seed, local.scenario, n, rep);
      const LatentConfig truth = make_scenario({local.scenario, n, seed});
      const Graph A = sample_grdpg(truth, stream_key(seed, {kGraphTag}), diagonal_policy(local));
      for (Estimator est : local.estimators) {
        BenchRow row;
        row.n = n;
        row.rep = rep;
        row.estimator = est;
        try {
          const auto est_seed = stream_key(seed, {kEstimatorTag, static_cast<std::uint64_t>(est)});
          row.seconds = fit_estimator(est, A, d, local, est_seed, local.threads).seconds;
        } catch (const std::exception&) {
          row.ok = false;
          row.seconds = std::numeric_limits<double>::quiet_NaN();
        }
        report.rows.push_back(row);
      }
    }
  }
  for (Estimator est : local.estimators) {
    std::vector<double> ns, secs;
    for (const auto& r : report.rows)
      if (r.estimator == est && r.ok) {
        ns.push_back(static_cast<double>(r.n));
        secs.push_back(r.seconds);
      }
    report.fits.push_back(fit_quadratic(est, ns, secs));
  }

  if (!local.out.empty()) {
    std::filesystem::create_directories(local.out);
    const std::filesystem::path dir(local.out);
    std::ostringstream timing, fits;
    timing << "scenario,n,rep,estimator,seed,seconds,status\n" << std::setprecision(17);
    for (const auto& r : report.rows)
      timing << to_string(local.scenario) << ',' << r.n << ',' << r.rep << ','
             << to_string(r.estimator) << ',' << rep_seed(local.seed, local.scenario, r.n, r.rep)
             << ',' << r.seconds << ',' << (r.ok ? "ok" : "failed") << '\n';
    fits << "estimator,c0,c1,c2,r_squared,points\n" << std::setprecision(17);
    for (const auto& f : report.fits)
      fits << to_string(f.estimator) << ',' << f.c0 << ',' << f.c1 << ',' << f.c2 << ','
           << f.r_squared << ',' << f.points << '\n';
    write_file(dir / "timing.csv", timing.str());
    write_file(dir / "timing_fit.csv", fits.str());
  }
  return report;
}

}  // namespace sanvi
