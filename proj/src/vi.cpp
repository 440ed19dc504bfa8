#include "sanvi/vi.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "sanvi/errors.hpp"
#include "sanvi/one_step.hpp"
#include "sanvi/parallel.hpp"
#include "sanvi/rng.hpp"

namespace sanvi {

namespace {

Eigen::MatrixXd lower_inverse(const Eigen::MatrixXd& L) {
  return L.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(L.rows(), L.cols()));
}

Eigen::MatrixXd precision_from_factor(const Eigen::MatrixXd& L) {
  const Eigen::MatrixXd Linv = lower_inverse(L);
  Eigen::MatrixXd G = Linv.transpose() * Linv;
  return 0.5 * (G + G.transpose());
}

void check_factor(const Eigen::MatrixXd& L, Eigen::Index d) {
  if (L.rows() != d || L.cols() != d) throw std::invalid_argument("L has wrong shape");
  for (Eigen::Index k = 0; k < d; ++k)
    if (!(L(k, k) > 0.0)) throw std::invalid_argument("L must have a positive diagonal");
}

// Restores a positive diagonal: Cholesky factor of L' L'^T + 1e-8 I where L'
// has |diag(L)|.
Eigen::MatrixXd repair_factor(const Eigen::MatrixXd& L) {
  Eigen::MatrixXd sym = L.triangularView<Eigen::Lower>();
  sym.diagonal() = sym.diagonal().cwiseAbs();
  const Eigen::MatrixXd S =
      sym * sym.transpose() + 1e-8 * Eigen::MatrixXd::Identity(L.rows(), L.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw SingularMatrixError("cannot repair Cholesky factor");
  return llt.matrixL();
}

Eigen::VectorXd draw_point(const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                           const Eigen::VectorXd& z, double inv_sqrt_n) {
  Eigen::VectorXd x = L.triangularView<Eigen::Lower>() * z;
  return mu + inv_sqrt_n * x;
}

}  // namespace

PriorSpec PriorSpec::gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw std::invalid_argument("prior covariance has wrong shape");
  if (!cov.isApprox(cov.transpose(), 1e-12))
    throw std::invalid_argument("prior covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("prior covariance is not positive definite");

  PriorSpec prior;
  Gaussian g;
  const auto d = static_cast<double>(mean.size());
  g.precision = llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  const double log_det = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  g.log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
  g.mean = std::move(mean);
  prior.gaussian_ = std::move(g);
  return prior;
}

double PriorSpec::log_density(const Eigen::VectorXd& x) const {
  if (!gaussian_) return 0.0;
  const Eigen::VectorXd r = x - gaussian_->mean;
  return gaussian_->log_norm - 0.5 * r.dot(gaussian_->precision * r);
}

Eigen::VectorXd PriorSpec::log_density_grad(const Eigen::VectorXd& x) const {
  if (!gaussian_) return Eigen::VectorXd::Zero(x.size());
  return -(gaussian_->precision * (x - gaussian_->mean));
}

AdamState::AdamState(Eigen::Index d)
    : m1_mu(Eigen::VectorXd::Zero(d)),
      m2_mu(Eigen::VectorXd::Zero(d)),
      m1_L(Eigen::MatrixXd::Zero(d, d)),
      m2_L(Eigen::MatrixXd::Zero(d, d)) {}

double vi_objective_mc(const EslContext& ctx, const PriorSpec& prior, const Eigen::VectorXd& mu,
                       const Eigen::MatrixXd& L, std::span<const Eigen::VectorXd> z_samples) {
  check_factor(L, ctx.d());
  if (z_samples.empty()) throw std::invalid_argument("need at least one z sample");
  LocalEsl esl(ctx);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(ctx.n()));
  double expected = 0.0;
  for (const auto& z : z_samples) {
    const Eigen::VectorXd x = draw_point(mu, L, z, inv_sqrt_n);
    expected += esl.value(x) + prior.log_density(x);
  }
  expected /= static_cast<double>(z_samples.size());
  return -L.diagonal().array().log().sum() - expected;
}

VariationalGradient noisy_grads(const EslContext& ctx, const PriorSpec& prior,
                                const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                                const Eigen::VectorXd& z) {
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(ctx.n()));
  const Eigen::VectorXd x = draw_point(mu, L, z, inv_sqrt_n);
  const Eigen::VectorXd g = esl_grad(ctx, x) + prior.log_density_grad(x);

  VariationalGradient out;
  out.g_mu = -g;
  out.g_L = -inv_sqrt_n * Eigen::MatrixXd((g * z.transpose()).triangularView<Eigen::Lower>());
  out.g_L.diagonal() -= L.diagonal().cwiseInverse();
  return out;
}

double h_tilde(double x, double c_n) noexcept {
  if (x > 0.0) return c_n / (c_n * x + 1.0);
  return -c_n * c_n * x + c_n;
}

Eigen::MatrixXd scaled_grad_L(const EslContext& ctx, const PriorSpec& prior,
                              const Eigen::VectorXd& mu, const Eigen::MatrixXd& L,
                              const Eigen::VectorXd& z, double c_n) {
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(ctx.n()));
  const Eigen::VectorXd x = draw_point(mu, L, z, inv_sqrt_n);
  const Eigen::VectorXd g = esl_grad(ctx, x) + prior.log_density_grad(x);
  Eigen::MatrixXd out =
      -inv_sqrt_n * Eigen::MatrixXd((g * z.transpose()).triangularView<Eigen::Lower>());
  for (Eigen::Index k = 0; k < L.rows(); ++k) out(k, k) -= h_tilde(L(k, k), c_n);
  return out;
}

VertexPosterior sanvi_vertex(const EslContext& ctx, const PriorSpec& prior,
                             const VertexPosterior& init, const SanviOptions& opts,
                             std::uint64_t vertex) {
  const Eigen::Index d = ctx.d();
  if (init.mu.size() != d) throw std::invalid_argument("initial mean has wrong dimension");
  check_factor(init.L, d);
  if (opts.batch < 1) throw std::invalid_argument("batch size must be positive");
  if (opts.max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");

  const double n = static_cast<double>(ctx.n());
  const double inv_sqrt_n = 1.0 / std::sqrt(n);
  const double c_n = opts.c_n.value_or(n);
  const double scale = 1.0 / (static_cast<double>(opts.batch) * std::sqrt(n));

  LocalEsl esl(ctx);
  AdamState adam(d);
  Eigen::VectorXd mu = init.mu;
  Eigen::MatrixXd L = init.L.triangularView<Eigen::Lower>();
  Eigen::VectorXd mu_checkpoint = mu;

  Eigen::VectorXd sum_mu(d), sq_mu(d), z(d), x(d), g(d);
  Eigen::MatrixXd sum_L(d, d), sq_L(d, d), g_L(d, d);
  int t = 0;
  while (t < opts.max_iters) {
    ++t;
    SubstreamRng rng(opts.seed, {vertex, static_cast<std::uint64_t>(t)});
    std::normal_distribution<double> normal;
    sum_mu.setZero();
    sq_mu.setZero();
    sum_L.setZero();
    sq_L.setZero();
    for (int k = 0; k < opts.batch; ++k) {
      if (opts.z_override) {
        z = opts.z_override(t, k);
      } else {
        for (Eigen::Index c = 0; c < d; ++c) z[c] = normal(rng);
      }
      x.noalias() = L.triangularView<Eigen::Lower>() * z;
      x = mu + inv_sqrt_n * x;
      g = esl.gradient(x);
      if (!prior.is_uniform()) g += prior.log_density_grad(x);

      // g_mu = -g; g_L = -h~(diag L) - tril(g z^T) / sqrt(n)
      g_L.setZero();
      for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c <= r; ++c) g_L(r, c) = -inv_sqrt_n * g[r] * z[c];
      for (Eigen::Index r = 0; r < d; ++r) g_L(r, r) -= h_tilde(L(r, r), c_n);

      sum_mu -= g;
      sq_mu += g.cwiseAbs2();
      sum_L += g_L;
      sq_L += g_L.cwiseAbs2();
    }
    Eigen::VectorXd mean_mu = scale * sum_mu;
    Eigen::VectorXd mean_sq_mu = scale * sq_mu;
    Eigen::MatrixXd mean_L = scale * sum_L;
    Eigen::MatrixXd mean_sq_L = scale * sq_L;
    adam_update(mu, adam.m1_mu, adam.m2_mu, mean_mu, mean_sq_mu, t, opts);
    adam_update(L, adam.m1_L, adam.m2_L, mean_L, mean_sq_L, t, opts);
    adam.t = t;

    if (opts.observer && opts.observe_every > 0 && t % opts.observe_every == 0)
      opts.observer(t, mu, L);
    if (opts.check_every > 0 && t % opts.check_every == 0) {
      if ((mu - mu_checkpoint).norm() < opts.tolerance * (1.0 + mu.norm())) break;
      mu_checkpoint = mu;
    }
  }

  bool positive = true;
  for (Eigen::Index k = 0; k < d; ++k) positive = positive && L(k, k) > 0.0;
  if (!positive) L = repair_factor(L);

  VertexPosterior out;
  out.mu = mu;
  out.L = L;
  out.G_hat = precision_from_factor(L);
  out.iterations = t;
  return out;
}

VertexPosterior sanvi_initial_posterior(const Embedding& ase_emb, const Embedding& signed_emb,
                                        Eigen::Index i, double tau) {
  const FisherInfo info = fisher_plugin(ase_emb, signed_emb, i, tau);
  Eigen::LLT<Eigen::MatrixXd> info_llt(info.G);
  if (info_llt.info() != Eigen::Success)
    throw SingularMatrixError("clamped plug-in information is not positive definite");
  const Eigen::MatrixXd cov =
      info_llt.solve(Eigen::MatrixXd::Identity(info.G.rows(), info.G.cols()));
  Eigen::LLT<Eigen::MatrixXd> cov_llt(0.5 * (cov + cov.transpose()));
  if (cov_llt.info() != Eigen::Success)
    throw SingularMatrixError("initial covariance is not positive definite");

  VertexPosterior init;
  init.mu = signed_emb.X.row(i).transpose();
  init.L = cov_llt.matrixL();
  init.G_hat = precision_from_factor(init.L);
  return init;
}

SanviResult sanvi_all(const Graph& A, const Embedding& ase_emb, const Embedding& signed_emb,
                      const PriorSpec& prior, const SanviOptions& opts, unsigned threads) {
  const auto n = A.n();
  if (static_cast<std::size_t>(signed_emb.X.rows()) != n)
    throw std::invalid_argument("embedding does not match the graph");
  const double tau = opts.tau.value_or(default_tau(n));

  SanviResult result;
  result.X_hat.resize(signed_emb.X.rows(), signed_emb.X.cols());
  result.posteriors.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    try {
      const auto vi = static_cast<Eigen::Index>(i);
      const EslContext ctx(signed_emb.X, A.row(i), tau);
      const VertexPosterior init = sanvi_initial_posterior(ase_emb, signed_emb, vi, tau);
      result.posteriors[i] = sanvi_vertex(ctx, prior, init, opts, i);
      result.X_hat.row(vi) = result.posteriors[i].mu.transpose();
    } catch (const std::exception& e) {
      throw std::runtime_error("vertex " + std::to_string(i) + ": " + e.what());
    }
  });
  return result;
}

SanviResult sanvi_all(const Graph& A, int d, const PriorSpec& prior, const SanviOptions& opts,
                      unsigned threads) {
  const EigenPairs eig = top_d_eigen(A, d);
  return sanvi_all(A, ase(eig), signed_ase(eig), prior, opts, threads);
}

void write_posterior_csv(const std::vector<VertexPosterior>& posteriors, std::ostream& out) {
  if (posteriors.empty()) return;
  const Eigen::Index d = posteriors.front().mu.size();
  out << "vertex";
  for (Eigen::Index k = 0; k < d; ++k) out << ",mu" << (k + 1);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c <= r; ++c) out << ",L" << (r + 1) << (c + 1);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c <= r; ++c) out << ",G" << (r + 1) << (c + 1);
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < posteriors.size(); ++i) {
    const auto& p = posteriors[i];
    out << i;
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << p.mu[k];
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) out << ',' << p.L(r, c);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) out << ',' << p.G_hat(r, c);
    out << '\n';
  }
}

}  // namespace sanvi
