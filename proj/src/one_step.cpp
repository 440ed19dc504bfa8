#include "sanvi/one_step.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sanvi/errors.hpp"
#include "sanvi/parallel.hpp"

namespace sanvi {

FisherInfo fisher_oracle(const LatentConfig& config, Eigen::Index i) {
  const Eigen::Index n = config.X0.rows();
  if (i < 0 || i >= n) throw std::invalid_argument("vertex out of range");
  const Eigen::VectorXd metric = config.signature.metric();
  // I_{p,q} x0_j for every j, as rows.
  const Eigen::MatrixXd signed_rows = config.X0 * metric.asDiagonal();
  const Eigen::VectorXd p = config.rho * (signed_rows * config.X0.row(i).transpose());

  Eigen::VectorXd weight(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = p[j] * (1.0 - p[j]);
    if (!(v > 0.0))
      throw std::domain_error("Fisher information undefined: p(1-p) <= 0 for pair (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
    weight[j] = config.rho / v;
  }
  FisherInfo info;
  info.G = signed_rows.transpose() * weight.asDiagonal() * signed_rows / static_cast<double>(n);
  info.G = (0.5 * (info.G + info.G.transpose())).eval();
  info.kind = FisherKind::oracle;
  return info;
}

FisherInfo fisher_plugin(const Embedding& ase_emb, const Embedding& signed_emb, Eigen::Index i,
                         std::optional<double> clamp_tau) {
  const Eigen::Index n = signed_emb.X.rows();
  Eigen::VectorXd p = plugin_prob_row(ase_emb, signed_emb, i);
  if (clamp_tau) p = p.cwiseMax(*clamp_tau).cwiseMin(1.0 - *clamp_tau);
  const Eigen::VectorXd weight = (p.array() * (1.0 - p.array())).inverse();
  FisherInfo info;
  info.G = signed_emb.X.transpose() * weight.asDiagonal() * signed_emb.X / static_cast<double>(n);
  info.G = (0.5 * (info.G + info.G.transpose())).eval();
  info.kind = FisherKind::plugin;
  return info;
}

Eigen::VectorXd one_step_update(const Eigen::VectorXd& x_ase, const Eigen::MatrixXd& signed_rows,
                                const Eigen::VectorXd& p, const Eigen::VectorXd& a_row) {
  const Eigen::Index n = signed_rows.rows();
  if (p.size() != n || a_row.size() != n || x_ase.size() != signed_rows.cols())
    throw std::invalid_argument("one-step inputs have inconsistent sizes");
  Eigen::VectorXd weight(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double v = p[j] * (1.0 - p[j]);
    if (v == 0.0) throw std::domain_error("plug-in probability is exactly 0 or 1");
    weight[j] = 1.0 / v;
  }
  const Eigen::VectorXd residual = ((a_row - p).array() * weight.array()).matrix();
  const Eigen::MatrixXd G =
      signed_rows.transpose() * weight.asDiagonal() * signed_rows / static_cast<double>(n);
  const Eigen::VectorXd score = signed_rows.transpose() * residual / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (G + G.transpose()));
  const Eigen::VectorXd magnitudes = es.eigenvalues().cwiseAbs();
  if (magnitudes.minCoeff() <= 1e-12 * magnitudes.sum())
    throw SingularMatrixError("plug-in information matrix is singular");
  return x_ase + G.partialPivLu().solve(score);
}

Eigen::MatrixXd ose(const Graph& A, const Embedding& ase_emb, const Embedding& signed_emb,
                    unsigned threads) {
  const Eigen::Index n = ase_emb.X.rows();
  const Eigen::Index d = ase_emb.X.cols();
  if (static_cast<std::size_t>(n) != A.n() || signed_emb.X.rows() != n || signed_emb.X.cols() != d)
    throw std::invalid_argument("embeddings do not match the graph");

  Eigen::MatrixXd out(n, d);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t ui) {
    const auto i = static_cast<Eigen::Index>(ui);
    const auto row = A.row(ui);
    Eigen::VectorXd a_row(n);
    for (Eigen::Index j = 0; j < n; ++j) a_row[j] = row[static_cast<std::size_t>(j)];
    try {
      out.row(i) = one_step_update(ase_emb.X.row(i).transpose(), signed_emb.X,
                                   plugin_prob_row(ase_emb, signed_emb, i), a_row)
                       .transpose();
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("vertex " + std::to_string(i) + ": " + e.what());
    } catch (const std::domain_error& e) {
      throw std::domain_error("vertex " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace sanvi
