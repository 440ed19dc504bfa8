#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "sanvi/graph_model.hpp"

namespace sanvi {

/// The d eigenpairs of largest |lambda|, reordered decreasing as real numbers.
/// Each eigenvector has its largest-magnitude entry positive.
struct EigenPairs {
  Eigen::VectorXd values;   // d
  Eigen::MatrixXd vectors;  // n x d, orthonormal columns
};

enum class EmbeddingVariant { ase, signed_ase };

struct Embedding {
  Eigen::MatrixXd X;        // n x d
  Eigen::VectorXd eigvals;  // decreasing
  Eigen::VectorXd signs;    // +1 / -1 per column
  EmbeddingVariant variant = EmbeddingVariant::ase;
  Eigen::MatrixXd U;        // underlying eigenvectors

  Eigen::Index n() const noexcept { return X.rows(); }
  Eigen::Index d() const noexcept { return X.cols(); }
};

/// Matrices up to this order are decomposed densely; larger ones go through
/// Lanczos with full reorthogonalization.
inline constexpr Eigen::Index kDenseEigenLimit = 400;

/// Top-d eigenpairs by absolute value. Throws std::invalid_argument on bad d,
/// std::runtime_error if the |lambda| boundary between positions d and d+1 is
/// a tie between eigenvalues of opposite sign, or if a selected eigenvalue is
/// zero.
EigenPairs top_d_eigen(const Graph& A, int d);
/// Same contract for an arbitrary symmetric matrix (e.g. a probability matrix).
EigenPairs top_d_eigen(const Eigen::MatrixXd& M, int d);

/// X = U |S|^{1/2}.
Embedding ase(const EigenPairs& eig);
/// X = U |S|^{1/2} sgn(S).
Embedding signed_ase(const EigenPairs& eig);
Embedding ase(const Graph& A, int d);
Embedding signed_ase(const Graph& A, int d);

/// p~_ij = x(ase)_i^T x(signed)_j for all pairs; n x n.
Eigen::MatrixXd plugin_probs(const Embedding& ase_emb, const Embedding& signed_emb);
/// Row i of plugin_probs without forming the full matrix.
Eigen::VectorXd plugin_prob_row(const Embedding& ase_emb, const Embedding& signed_emb,
                                Eigen::Index i);

/// Header "x1,...,xd", one row per vertex, 17 significant digits.
void write_embedding_csv(const Eigen::MatrixXd& X, std::ostream& out);

}  // namespace sanvi
