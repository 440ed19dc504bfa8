#include "sanvi/esl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sanvi/errors.hpp"

namespace sanvi {

namespace {

constexpr int kMaxNewtonIterations = 100;
constexpr int kMaxHalvings = 30;
constexpr double kRoundingGain = 1e-13;

inline double psi_inline(double t, double tau) noexcept {
  if (t < tau) return -t * t / (2.0 * tau * tau) + 2.0 * t / tau + (std::log(tau) - 1.5);
  if (t > 1.0) return -t * t / 2.0 + 2.0 * t - 1.5;
  return std::log(t);
}

inline double psi_d1_inline(double t, double tau) noexcept {
  if (t < tau) return -t / (tau * tau) + 2.0 / tau;
  if (t > 1.0) return 2.0 - t;
  return 1.0 / t;
}

inline double psi_d2_inline(double t, double tau) noexcept {
  if (t < tau) return -1.0 / (tau * tau);
  if (t > 1.0) return -1.0;
  return -1.0 / (t * t);
}

}  // namespace

double default_tau(std::size_t n) {
  return std::min(0.001, std::exp(1.5) / static_cast<double>(n));
}

double psi(double t, double tau) noexcept { return psi_inline(t, tau); }
double psi_d1(double t, double tau) noexcept { return psi_d1_inline(t, tau); }
double psi_d2(double t, double tau) noexcept { return psi_d2_inline(t, tau); }

EslContext::EslContext(const Eigen::MatrixXd& signed_rows,
                       std::span<const std::uint8_t> adjacency_row, double tau)
    : xt_(&signed_rows), row_(adjacency_row), tau_(tau) {
  if (!(tau > 0.0 && tau < 0.5)) throw std::invalid_argument("tau must lie in (0, 1/2)");
  if (static_cast<std::size_t>(signed_rows.rows()) != adjacency_row.size())
    throw std::invalid_argument("adjacency row has " + std::to_string(adjacency_row.size()) +
                                " entries but the embedding has " +
                                std::to_string(signed_rows.rows()) + " rows");
}

LocalEsl::LocalEsl(const EslContext& ctx) : ctx_(ctx), u_(ctx.n()), w_(ctx.n()) {}

double LocalEsl::value(const Eigen::VectorXd& x) {
  u_.noalias() = ctx_.Xt() * x;
  const auto row = ctx_.row();
  const double tau = ctx_.tau();
  const auto n = static_cast<std::size_t>(ctx_.n());
  const double* u = u_.data();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += psi_inline(row[j] ? u[j] : 1.0 - u[j], tau);
  return total;
}

Eigen::VectorXd LocalEsl::gradient(const Eigen::VectorXd& x) {
  u_.noalias() = ctx_.Xt() * x;
  const auto row = ctx_.row();
  const double tau = ctx_.tau();
  const auto n = static_cast<std::size_t>(ctx_.n());
  const double* u = u_.data();
  double* c = w_.data();
  for (std::size_t j = 0; j < n; ++j)
    c[j] = row[j] ? psi_d1_inline(u[j], tau) : -psi_d1_inline(1.0 - u[j], tau);
  return ctx_.Xt().transpose() * w_;
}

Eigen::MatrixXd LocalEsl::hessian(const Eigen::VectorXd& x) {
  u_.noalias() = ctx_.Xt() * x;
  const auto row = ctx_.row();
  const double tau = ctx_.tau();
  const auto n = static_cast<std::size_t>(ctx_.n());
  const double* u = u_.data();
  double* c = w_.data();
  for (std::size_t j = 0; j < n; ++j)
    c[j] = row[j] ? psi_d2_inline(u[j], tau) : psi_d2_inline(1.0 - u[j], tau);
  Eigen::MatrixXd H = ctx_.Xt().transpose() * w_.asDiagonal() * ctx_.Xt();
  return 0.5 * (H + H.transpose());
}

double esl_value(const EslContext& ctx, const Eigen::VectorXd& x) {
  return LocalEsl(ctx).value(x);
}

Eigen::VectorXd esl_grad(const EslContext& ctx, const Eigen::VectorXd& x) {
  return LocalEsl(ctx).gradient(x);
}

Eigen::MatrixXd esl_hess(const EslContext& ctx, const Eigen::VectorXd& x) {
  return LocalEsl(ctx).hessian(x);
}

MesleResult mesle(const EslContext& ctx, const Eigen::VectorXd& start) {
  if (start.size() != ctx.d()) throw std::invalid_argument("start point has wrong dimension");
  LocalEsl esl(ctx);
  const double tolerance = 1e-9 * static_cast<double>(ctx.n());

  MesleResult result;
  Eigen::VectorXd x = start;
  double value = esl.value(x);
  Eigen::VectorXd grad = esl.gradient(x);

  for (int iter = 0;; ++iter) {
    result.grad_norm = grad.norm();
    if (result.grad_norm <= tolerance) {
      result.x_hat = x;
      result.iterations = iter;
      result.hessian = esl.hessian(x);
      return result;
    }
    if (iter == kMaxNewtonIterations)
      throw ConvergenceError("MESLE Newton iteration did not converge; gradient norm " +
                             std::to_string(result.grad_norm));

    const Eigen::MatrixXd H = esl.hessian(x);
    Eigen::LLT<Eigen::MatrixXd> llt(-H);
    if (llt.info() != Eigen::Success)
      throw SingularMatrixError("surrogate log-likelihood Hessian is not negative definite");
    Eigen::VectorXd step = llt.solve(grad);
    const double decrement = 0.5 * grad.dot(step);

    bool improved = false;
    for (int h = 0; h <= kMaxHalvings; ++h) {
      const Eigen::VectorXd candidate = x + step;
      const double candidate_value = esl.value(candidate);
      if (candidate_value > value) {
        x = candidate;
        value = candidate_value;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      // The objective no longer resolves the remaining gain; near the optimum
      // a plain Newton step still shrinks the gradient.
      const Eigen::VectorXd candidate = x + llt.solve(grad);
      const Eigen::VectorXd candidate_grad = esl.gradient(candidate);
      if (candidate_grad.norm() < grad.norm()) {
        x = candidate;
        value = esl.value(x);
        grad = candidate_grad;
        continue;
      }
      if (decrement <= kRoundingGain * std::max(1.0, std::abs(value))) {
        result.x_hat = x;
        result.iterations = iter;
        result.hessian = H;
        return result;
      }
      throw ConvergenceError("MESLE line search stalled; gradient norm " +
                             std::to_string(result.grad_norm));
    }
    grad = esl.gradient(x);
  }
}

MesleResult mesle(const EslContext& ctx, Eigen::Index vertex) {
  if (vertex < 0 || vertex >= ctx.n()) throw std::invalid_argument("vertex out of range");
  return mesle(ctx, Eigen::VectorXd(ctx.Xt().row(vertex).transpose()));
}

}  // namespace sanvi
