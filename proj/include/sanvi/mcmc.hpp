#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sanvi/esl.hpp"
#include "sanvi/graph_model.hpp"
#include "sanvi/spectral.hpp"
#include "sanvi/vi.hpp"

namespace sanvi {

struct ChainSpec {
  int length = 3000;
  int thin = 2;
  int burn_in = 500;  // counted in thinned draws
  std::optional<double> proposal_sd;  // tuned by a pilot chain when empty
  double target_accept = 0.25;
  int pilot_length = 500;
  std::uint64_t seed = 0;
  bool keep_draws = false;

  int kept() const noexcept { return length / thin - burn_in; }
  /// Throws std::invalid_argument unless length, thin > 0, burn_in >= 0,
  /// kept() > 0 and the target lies in (0, 1).
  void validate() const;
};

struct ChainResult {
  Eigen::VectorXd posterior_mean;
  double acceptance_rate = 0.0;
  int draws_kept = 0;
  double proposal_sd_used = 0.0;
  int accepted = 0;
  std::vector<std::uint8_t> accept_log;  // one entry per proposal
  Eigen::MatrixXd draws;  // kept draws as rows, only when keep_draws
};

/// Gaussian random-walk Metropolis-Hastings on
///   l(x) + log prior(x)
/// with proposals x + sd * z. The draw sequence depends only on
/// (spec.seed, vertex). Requires spec.proposal_sd to be set.
ChainResult mh_vertex(const EslContext& ctx, const PriorSpec& prior, const Eigen::VectorXd& init,
                      const ChainSpec& spec, std::uint64_t vertex = 0);

/// Pilot chain of spec.pilot_length steps adapting
///   log sd <- log sd + t^{-0.6} (accepted_t - target)
/// and returning the final sd. Starts from `initial_sd` or, when empty, from
/// 2.4 / sqrt(trace of the negative Hessian at `init`).
double tune_proposal(const EslContext& ctx, const PriorSpec& prior, const Eigen::VectorXd& init,
                     double target, const ChainSpec& spec, std::uint64_t vertex = 0,
                     std::optional<double> initial_sd = std::nullopt);

struct BayesResult {
  Eigen::MatrixXd X_hat;
  std::vector<ChainResult> chains;
};

/// Posterior mean for every vertex, each chain started at its signed-ASE row
/// and tuned first unless spec.proposal_sd is set.
BayesResult be_all(const Graph& A, const Embedding& signed_emb, const PriorSpec& prior,
                   const ChainSpec& spec, std::optional<double> tau = std::nullopt,
                   unsigned threads = 1);
BayesResult be_all(const Graph& A, int d, const PriorSpec& prior, const ChainSpec& spec,
                   std::optional<double> tau = std::nullopt, unsigned threads = 1);

/// Columns: vertex, draw, x1..xd. Only chains run with keep_draws contribute.
void write_draws_csv(const std::vector<ChainResult>& chains, std::ostream& out);

}  // namespace sanvi
