#pragma once

#include <optional>

#include <Eigen/Dense>

#include "sanvi/graph_model.hpp"
#include "sanvi/spectral.hpp"

namespace sanvi {

enum class FisherKind { oracle, plugin };

struct FisherInfo {
  Eigen::MatrixXd G;
  FisherKind kind = FisherKind::oracle;
};

/// G_0in = (1/n) sum_j rho I x0_j x0_j^T I / {p0_ij (1 - p0_ij)}, the Fisher
/// information for vertex i at the truth. Throws std::domain_error if some
/// p0_ij (1 - p0_ij) <= 0.
FisherInfo fisher_oracle(const LatentConfig& config, Eigen::Index i);

/// (1/n) sum_j xt_j xt_j^T / {p~_ij (1 - p~_ij)} with p~ from the plug-in
/// embeddings. With `clamp_tau`, p~ is clamped to [tau, 1 - tau] first;
/// otherwise the matrix can be indefinite.
FisherInfo fisher_plugin(const Embedding& ase_emb, const Embedding& signed_emb, Eigen::Index i,
                         std::optional<double> clamp_tau = std::nullopt);

/// x_ase + G^{-1} (1/n) sum_j (a_j - p_j) xt_j / {p_j (1 - p_j)} for one vertex,
/// where G is the plug-in information built from `p`. `a_row` may be real
/// valued. Same errors as ose() without the vertex prefix.
Eigen::VectorXd one_step_update(const Eigen::VectorXd& x_ase, const Eigen::MatrixXd& signed_rows,
                                const Eigen::VectorXd& p, const Eigen::VectorXd& a_row);

/// One-step estimator: for each vertex
///   x_i + G~_i^{-1} (1/n) sum_j (A_ij - p~_ij) xt_j / {p~_ij (1 - p~_ij)}
/// with unclamped plug-in probabilities. Throws std::domain_error if some
/// p~_ij is exactly 0 or 1 and SingularMatrixError if G~_i has an eigenvalue
/// of magnitude <= 1e-12 times the sum of eigenvalue magnitudes. Error messages name the vertex.
Eigen::MatrixXd ose(const Graph& A, const Embedding& ase_emb, const Embedding& signed_emb,
                    unsigned threads = 1);

}  // namespace sanvi
