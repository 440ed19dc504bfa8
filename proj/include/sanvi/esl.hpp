#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Dense>

namespace sanvi {

/// Truncation used in the experiments: min(0.001, e^{1.5} / n).
double default_tau(std::size_t n);

// Log extended to all of R: log(t) on [tau, 1], matched quadratics outside
// so that the result is twice continuously differentiable.
double psi(double t, double tau) noexcept;
double psi_d1(double t, double tau) noexcept;
double psi_d2(double t, double tau) noexcept;

/// Inputs of the local surrogate log-likelihood for one vertex: the signed
/// embedding rows, that vertex's adjacency row and the truncation level.
/// Holds references; the referenced data must outlive the context.
class EslContext {
 public:
  EslContext(const Eigen::MatrixXd& signed_rows, std::span<const std::uint8_t> adjacency_row,
             double tau);

  const Eigen::MatrixXd& Xt() const noexcept { return *xt_; }
  std::span<const std::uint8_t> row() const noexcept { return row_; }
  double tau() const noexcept { return tau_; }
  Eigen::Index n() const noexcept { return xt_->rows(); }
  Eigen::Index d() const noexcept { return xt_->cols(); }

 private:
  const Eigen::MatrixXd* xt_;
  std::span<const std::uint8_t> row_;
  double tau_;
};

/// Evaluates the surrogate log-likelihood
///   sum_j A_ij psi(x^T xt_j) + (1 - A_ij) psi(1 - x^T xt_j)
/// and its derivatives. Keeps scratch buffers, so one instance per thread.
class LocalEsl {
 public:
  explicit LocalEsl(const EslContext& ctx);

  const EslContext& context() const noexcept { return ctx_; }

  double value(const Eigen::VectorXd& x);
  Eigen::VectorXd gradient(const Eigen::VectorXd& x);
  /// Symmetric d x d; negative definite when the rows xt_j span R^d.
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x);

 private:
  EslContext ctx_;
  Eigen::VectorXd u_;
  Eigen::VectorXd w_;
};

double esl_value(const EslContext& ctx, const Eigen::VectorXd& x);
Eigen::VectorXd esl_grad(const EslContext& ctx, const Eigen::VectorXd& x);
Eigen::MatrixXd esl_hess(const EslContext& ctx, const Eigen::VectorXd& x);

struct MesleResult {
  Eigen::VectorXd x_hat;
  int iterations = 0;
  double grad_norm = 0.0;
  Eigen::MatrixXd hessian;
};

/// Damped Newton ascent to the unique maximizer of the surrogate
/// log-likelihood, started at `start`. Stops once the gradient norm is at most
/// 1e-9 * n. When the objective can no longer resolve an ascent step, a plain
/// Newton step is taken if it shrinks the gradient; otherwise the solver stops
/// if the predicted gain is below 1e-13 * max(1, |objective|). Throws ConvergenceError after 100 iterations and
/// SingularMatrixError if the Hessian is not negative definite.
MesleResult mesle(const EslContext& ctx, const Eigen::VectorXd& start);
/// Starts from the vertex's own signed-embedding row.
MesleResult mesle(const EslContext& ctx, Eigen::Index vertex);

}  // namespace sanvi
