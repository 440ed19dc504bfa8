#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sanvi/esl.hpp"
#include "sanvi/graph_model.hpp"
#include "sanvi/spectral.hpp"

namespace sanvi {

/// Independent per-vertex prior: improper uniform (log density 0) or Gaussian.
class PriorSpec {
 public:
  static PriorSpec improper_uniform() { return PriorSpec(); }
  /// Throws std::invalid_argument unless cov is symmetric positive definite.
  static PriorSpec gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  bool is_uniform() const noexcept { return !gaussian_; }
  double log_density(const Eigen::VectorXd& x) const;
  Eigen::VectorXd log_density_grad(const Eigen::VectorXd& x) const;

 private:
  struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd precision;
    double log_norm = 0.0;
  };
  std::optional<Gaussian> gaussian_;
};

/// Gaussian variational factor N(mu, (1/n) L L^T) for one vertex.
struct VertexPosterior {
  Eigen::VectorXd mu;
  Eigen::MatrixXd L;       // lower triangular, positive diagonal
  Eigen::MatrixXd G_hat;   // (L L^T)^{-1}
  int iterations = 0;
};

struct AdamState {
  Eigen::VectorXd m1_mu, m2_mu;
  Eigen::MatrixXd m1_L, m2_L;
  int t = 0;

  explicit AdamState(Eigen::Index d = 0);
};

struct SanviOptions {
  int batch = 2;             // s
  double alpha0 = 0.01;
  double beta1 = 0.01;
  double beta2 = 0.95;
  double eps0 = 1e-8;
  int max_iters = 1000;
  std::uint64_t seed = 0;
  std::optional<double> tau;  // default_tau(n) when empty
  std::optional<double> c_n;  // n when empty
  /// Convergence is checked every this many iterations by comparing mu with
  /// its value that many iterations earlier.
  int check_every = 10;
  double tolerance = 1e-6;
  /// Replaces the Gaussian draws; called as z_override(iteration, k).
  std::function<Eigen::VectorXd(int, int)> z_override;
  /// Called after every `observe_every` iterations with (t, mu, L).
  std::function<void(int, const Eigen::VectorXd&, const Eigen::MatrixXd&)> observer;
  int observe_every = 100;
};

/// -log det L - (1/s) sum_k [ l(mu + L z_k / sqrt(n)) + log prior(...) ].
/// Throws std::invalid_argument if diag(L) has a nonpositive entry.
double vi_objective_mc(const EslContext& ctx, const PriorSpec& prior, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& L, std::span<const Eigen::VectorXd> z_samples);

struct VariationalGradient {
  Eigen::VectorXd g_mu;
  Eigen::MatrixXd g_L;
};

/// Exact gradients of the single-draw objective at x = mu + L z / sqrt(n):
///   g_mu = -dl/dx - dlog prior/dx
///   g_L  = -diag(L)^{-1} - tril{(dl/dx + dlog prior/dx) z^T} / sqrt(n)
VariationalGradient noisy_grads(const EslContext& ctx, const PriorSpec& prior,
                                const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                                const Eigen::VectorXd& z);

/// c/(c x + 1) for x > 0, -c^2 x + c otherwise. C^1 at zero, ~1/x for large x.
double h_tilde(double x, double c_n) noexcept;

/// noisy_grads().g_L with the -1/L_kk diagonal replaced by -h_tilde(L_kk).
Eigen::MatrixXd scaled_grad_L(const EslContext& ctx, const PriorSpec& prior,
                              const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                              const Eigen::VectorXd& z, double c_n);

/// One bias-corrected Adam update, entrywise:
///   m1 <- b1 m1 + (1 - b1) g,  m2 <- b2 m2 + (1 - b2) g2,
///   param <- param - a0 (m1 / (1 - b1^t)) / (sqrt(m2 / (1 - b2^t)) + eps).
/// `g2` is passed separately because the batch update averages squares.
/// `t` is the 1-based iteration number.
template <typename Dense>
void adam_update(Dense& param, Dense& m1, Dense& m2, const Dense& g, const Dense& g2, int t,
                 const SanviOptions& opts) {
  m1 = opts.beta1 * m1 + (1.0 - opts.beta1) * g;
  m2 = opts.beta2 * m2 + (1.0 - opts.beta2) * g2;
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  param -= (opts.alpha0 * (m1.array() / c1) / ((m2.array() / c2).sqrt() + opts.eps0)).matrix();
}

/// Stochastic-gradient Gaussian VI for one vertex with Adam. Each iteration
/// draws `batch` standard normal vectors from the substream
/// (seed, vertex, iteration), averages the per-draw gradients with factor
/// 1/(s sqrt(n)) and applies the bias-corrected update. A nonpositive diagonal
/// in L is repaired at the end, so the result always satisfies the
/// VertexPosterior invariants.
VertexPosterior sanvi_vertex(const EslContext& ctx, const PriorSpec& prior,
                             const VertexPosterior& init, const SanviOptions& opts,
                             std::uint64_t vertex = 0);

/// Starting point for vertex i: mu = xt_i and L = chol(G~_i^{-1}) with the
/// plug-in information computed from p~ clamped to [tau, 1 - tau].
VertexPosterior sanvi_initial_posterior(const Embedding& ase_emb, const Embedding& signed_emb,
                                        Eigen::Index i, double tau);

struct SanviResult {
  Eigen::MatrixXd X_hat;                 // n x d, rows are mu_i
  std::vector<VertexPosterior> posteriors;
};

SanviResult sanvi_all(const Graph& A, const Embedding& ase_emb, const Embedding& signed_emb,
                      const PriorSpec& prior, const SanviOptions& opts, unsigned threads = 1);
/// Computes the embeddings first.
SanviResult sanvi_all(const Graph& A, int d, const PriorSpec& prior, const SanviOptions& opts,
                      unsigned threads = 1);

/// Per vertex: mu entries, then the row-major lower triangle of L, then the
/// row-major lower triangle of G_hat.
void write_posterior_csv(const std::vector<VertexPosterior>& posteriors, std::ostream& out);

}  // namespace sanvi
