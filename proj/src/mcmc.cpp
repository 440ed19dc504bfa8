#include "sanvi/mcmc.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "sanvi/parallel.hpp"
#include "sanvi/rng.hpp"

namespace sanvi {

namespace {

constexpr std::uint64_t kPilotTag = 1;
constexpr std::uint64_t kChainTag = 2;

double log_target(LocalEsl& esl, const PriorSpec& prior, const Eigen::VectorXd& x) {
  double v = esl.value(x);
  if (!prior.is_uniform()) v += prior.log_density(x);
  return v;
}

}  // namespace

void ChainSpec::validate() const {
  if (length <= 0 || thin <= 0 || burn_in < 0)
    throw std::invalid_argument("chain length and thinning must be positive");
  if (kept() <= 0)
    throw std::invalid_argument("burn-in leaves no draws: length/thin - burn_in = " +
                                std::to_string(kept()));
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
  if (pilot_length < 0) throw std::invalid_argument("pilot length must be nonnegative");
  if (proposal_sd && !(*proposal_sd > 0.0))
    throw std::invalid_argument("proposal sd must be positive");
}

ChainResult mh_vertex(const EslContext& ctx, const PriorSpec& prior, const Eigen::VectorXd& init,
                      const ChainSpec& spec, std::uint64_t vertex) {
  spec.validate();
  if (!spec.proposal_sd) throw std::invalid_argument("mh_vertex needs a proposal sd");
  if (init.size() != ctx.d()) throw std::invalid_argument("initial point has wrong dimension");
  const Eigen::Index d = ctx.d();
  const double sd = *spec.proposal_sd;

  LocalEsl esl(ctx);
  SubstreamRng rng(spec.seed, {vertex, kChainTag});
  std::normal_distribution<double> normal;

  ChainResult result;
  result.proposal_sd_used = sd;
  result.draws_kept = spec.kept();
  result.accept_log.resize(static_cast<std::size_t>(spec.length));
  if (spec.keep_draws) result.draws.resize(result.draws_kept, d);

  Eigen::VectorXd x = init;
  Eigen::VectorXd candidate(d);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  double current = log_target(esl, prior, x);
  int kept = 0;
  for (int step = 1; step <= spec.length; ++step) {
    for (Eigen::Index k = 0; k < d; ++k) candidate[k] = x[k] + sd * normal(rng);
    const double proposed = log_target(esl, prior, candidate);
    const double u = rng.uniform();
    const bool accept = std::log(u) < proposed - current;
    if (accept) {
      x = candidate;
      current = proposed;
      ++result.accepted;
    }
    result.accept_log[static_cast<std::size_t>(step - 1)] = accept ? 1 : 0;

    if (step % spec.thin == 0 && step / spec.thin > spec.burn_in) {
      sum += x;
      if (spec.keep_draws) result.draws.row(kept) = x.transpose();
      ++kept;
    }
  }
  result.posterior_mean = sum / static_cast<double>(kept);
  result.acceptance_rate = static_cast<double>(result.accepted) / spec.length;
  return result;
}

double tune_proposal(const EslContext& ctx, const PriorSpec& prior, const Eigen::VectorXd& init,
                     double target, const ChainSpec& spec, std::uint64_t vertex,
                     std::optional<double> initial_sd) {
  if (!(target > 0.0 && target < 1.0))
    throw std::invalid_argument("target acceptance must lie in (0, 1)");
  const Eigen::Index d = ctx.d();
  LocalEsl esl(ctx);

  double sd;
  if (initial_sd) {
    sd = *initial_sd;
  } else {
    const double curvature = -esl.hessian(init).trace();
    sd = curvature > 0.0 ? 2.4 / std::sqrt(curvature)
                         : 1.0 / std::sqrt(static_cast<double>(ctx.n()));
  }
  if (!(sd > 0.0) || !std::isfinite(sd)) throw std::invalid_argument("initial sd must be positive");

  SubstreamRng rng(spec.seed, {vertex, kPilotTag});
  std::normal_distribution<double> normal;
  double log_sd = std::log(sd);
  Eigen::VectorXd x = init;
  Eigen::VectorXd candidate(d);
  double current = log_target(esl, prior, x);
  for (int t = 1; t <= spec.pilot_length; ++t) {
    const double step_sd = std::exp(log_sd);
    for (Eigen::Index k = 0; k < d; ++k) candidate[k] = x[k] + step_sd * normal(rng);
    const double proposed = log_target(esl, prior, candidate);
    const double ratio = proposed - current;
    const bool accept = std::log(rng.uniform()) < ratio;
    if (accept) {
      x = candidate;
      current = proposed;
    }
    log_sd += std::pow(static_cast<double>(t), -0.6) * ((accept ? 1.0 : 0.0) - target);
  }
  return std::exp(log_sd);
}

BayesResult be_all(const Graph& A, const Embedding& signed_emb, const PriorSpec& prior,
                   const ChainSpec& spec, std::optional<double> tau, unsigned threads) {
  spec.validate();
  const std::size_t n = A.n();
  if (static_cast<std::size_t>(signed_emb.X.rows()) != n)
    throw std::invalid_argument("embedding does not match the graph");
  const double level = tau.value_or(default_tau(n));

  BayesResult result;
  result.X_hat.resize(signed_emb.X.rows(), signed_emb.X.cols());
  result.chains.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      const auto vi = static_cast<Eigen::Index>(i);
      const EslContext ctx(signed_emb.X, A.row(i), level);
      const Eigen::VectorXd init = signed_emb.X.row(vi).transpose();
      ChainSpec chain = spec;
      if (!chain.proposal_sd)
        chain.proposal_sd = tune_proposal(ctx, prior, init, spec.target_accept, spec, i);
      result.chains[i] = mh_vertex(ctx, prior, init, chain, i);
      result.X_hat.row(vi) = result.chains[i].posterior_mean.transpose();
    } catch (const std::exception& e) {
      throw std::runtime_error("vertex " + std::to_string(i) + ": " + e.what());
    }
  });
  return result;
}

BayesResult be_all(const Graph& A, int d, const PriorSpec& prior, const ChainSpec& spec,
                   std::optional<double> tau, unsigned threads) {
  return be_all(A, signed_ase(A, d), prior, spec, tau, threads);
}

void write_draws_csv(const std::vector<ChainResult>& chains, std::ostream& out) {
  Eigen::Index d = 0;
  for (const auto& c : chains)
    if (c.draws.rows() > 0) d = c.draws.cols();
  out << "vertex,draw";
  for (Eigen::Index k = 0; k < d; ++k) out << ",x" << (k + 1);
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto& draws = chains[i].draws;
    for (Eigen::Index r = 0; r < draws.rows(); ++r) {
      out << i << ',' << r;
      for (Eigen::Index k = 0; k < draws.cols(); ++k) out << ',' << draws(r, k);
      out << '\n';
    }
  }
}

}  // namespace sanvi
