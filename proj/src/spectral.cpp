#include "sanvi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "sanvi/rng.hpp"

namespace sanvi {

namespace {

constexpr std::uint64_t kLanczosStartSeed = 0x1a2c2b5e7d3f9e01ULL;
constexpr double kRitzTolerance = 1e-10;
constexpr double kResidualTolerance = 1e-6;
constexpr double kTieTolerance = 1e-10;

void check_dimension(Eigen::Index n, int d) {
  if (d < 1 || d > n)
    throw std::invalid_argument("embedding dimension " + std::to_string(d) +
                                " must lie in [1, " + std::to_string(n) + "]");
}

// Picks the d entries of `values` largest in |lambda|, validates the selection
// boundary, and returns them reordered decreasing as real numbers.
EigenPairs select_top(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors, int d) {
  const auto m = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double fa = std::abs(values[a]);
    const double fb = std::abs(values[b]);
    if (fa != fb) return fa > fb;
    return values[a] > values[b];
  });

  const auto ud = static_cast<std::size_t>(d);
  if (m > d) {
    const double ld = values[order[ud - 1]];
    const double next = values[order[ud]];
    const double gap = std::abs(ld) - std::abs(next);
    if (gap <= kTieTolerance * std::max(1.0, std::abs(ld)) && (ld > 0) != (next > 0))
      throw std::runtime_error("eigenvalue selection is ambiguous: |lambda_d| = " +
                               std::to_string(std::abs(ld)) + " ties with an eigenvalue of " +
                               "opposite sign");
  }

  std::vector<Eigen::Index> chosen(order.begin(), order.begin() + d);
  std::sort(chosen.begin(), chosen.end(),
            [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

  const double scale = std::max(1.0, std::abs(values[order[0]]));
  EigenPairs out;
  out.values.resize(d);
  out.vectors.resize(vectors.rows(), d);
  for (int k = 0; k < d; ++k) {
    const double lambda = values[chosen[static_cast<std::size_t>(k)]];
    if (std::abs(lambda) <= 1e-12 * scale)
      throw std::runtime_error("selected eigenvalue " + std::to_string(k + 1) + " is zero");
    out.values[k] = lambda;
    Eigen::VectorXd v = vectors.col(chosen[static_cast<std::size_t>(k)]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    out.vectors.col(k) = v;
  }
  return out;
}

EigenPairs dense_top(const Eigen::MatrixXd& M, int d) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
  return select_top(es.eigenvalues(), es.eigenvectors(), d);
}

// Lanczos with full reorthogonalization. `apply(v, w)` computes w = M v.
template <typename MatVec>
EigenPairs lanczos_top(const MatVec& apply, Eigen::Index n, int d) {
  SubstreamRng rng(kLanczosStartSeed);
  auto random_vector = [&] {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = 2.0 * rng.uniform() - 1.0;
    return v;
  };

  Eigen::Index capacity = std::min<Eigen::Index>(n, 4 * d + 64);
  Eigen::MatrixXd V(n, capacity);
  std::vector<double> alpha;
  std::vector<double> beta;

  V.col(0) = random_vector().normalized();
  Eigen::VectorXd w(n);
  const Eigen::Index min_steps = std::min<Eigen::Index>(n, 2 * d + 20);
  Eigen::Index next_check = min_steps;
  double norm_estimate = 0.0;

  for (Eigen::Index m = 0;;) {
    apply(V.col(m), w);
    alpha.push_back(V.col(m).dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd h = V.leftCols(m + 1).transpose() * w;
      w.noalias() -= V.leftCols(m + 1) * h;
    }
    const double b = w.norm();
    norm_estimate = std::max(norm_estimate, std::abs(alpha.back()) + b +
                                                (beta.empty() ? 0.0 : beta.back()));
    ++m;
    const bool breakdown = b <= 1e-12 * std::max(1.0, norm_estimate);

    if (m == n || m >= next_check) {
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
      for (Eigen::Index k = 0; k + 1 < m; ++k) sub[k] = beta[static_cast<std::size_t>(k)];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const Eigen::VectorXd& theta = es.eigenvalues();
      const Eigen::MatrixXd& S = es.eigenvectors();

      std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index c) {
        return std::abs(theta[a]) > std::abs(theta[c]);
      });
      bool converged = m >= d;
      for (int k = 0; converged && k < d; ++k) {
        const auto idx = order[static_cast<std::size_t>(k)];
        const double residual = b * std::abs(S(m - 1, idx));
        converged = residual <= kRitzTolerance * std::max(1.0, std::abs(theta[idx]));
      }

      if (converged || m == n) {
        const Eigen::MatrixXd ritz_vectors = V.leftCols(m) * S;
        EigenPairs out = select_top(theta, ritz_vectors, d);
        bool ok = true;
        for (int k = 0; k < d; ++k) {
          Eigen::VectorXd Av(n);
          apply(out.vectors.col(k), Av);
          const double r = (Av - out.values[k] * out.vectors.col(k)).norm();
          ok = ok && r <= kResidualTolerance * std::max(1.0, std::abs(out.values[k]));
        }
        if (ok) return out;
        if (m == n) throw std::runtime_error("Lanczos failed to meet the residual bound");
      }
      next_check = std::min(n, m + 10);
    }

    if (m == capacity) {
      capacity = std::min(n, 2 * capacity);
      V.conservativeResize(Eigen::NoChange, capacity);
    }
    if (breakdown) {
      // Invariant subspace found; continue in its orthogonal complement.
      w = random_vector();
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd h = V.leftCols(m).transpose() * w;
        w.noalias() -= V.leftCols(m) * h;
      }
      beta.push_back(0.0);
      V.col(m) = w.normalized();
    } else {
      beta.push_back(b);
      V.col(m) = w / b;
    }
  }
}

}  // namespace

EigenPairs top_d_eigen(const Graph& A, int d) {
  const auto n = static_cast<Eigen::Index>(A.n());
  check_dimension(n, d);
  if (n <= kDenseEigenLimit) return dense_top(A.to_dense(), d);

  // Compressed rows for the sparse product.
  std::vector<std::uint32_t> offsets(A.n() + 1, 0);
  std::vector<std::uint32_t> columns;
  columns.reserve(A.unit_entries());
  for (std::size_t i = 0; i < A.n(); ++i) {
    const auto r = A.row(i);
    for (std::size_t j = 0; j < A.n(); ++j)
      if (r[j]) columns.push_back(static_cast<std::uint32_t>(j));
    offsets[i + 1] = static_cast<std::uint32_t>(columns.size());
  }
  auto apply = [&](const auto& v, Eigen::VectorXd& w) {
    for (std::size_t i = 0; i < A.n(); ++i) {
      double s = 0.0;
      for (auto k = offsets[i]; k < offsets[i + 1]; ++k) s += v[columns[k]];
      w[static_cast<Eigen::Index>(i)] = s;
    }
  };
  return lanczos_top(apply, n, d);
}

EigenPairs top_d_eigen(const Eigen::MatrixXd& M, int d) {
  if (M.rows() != M.cols()) throw std::invalid_argument("matrix must be square");
  check_dimension(M.rows(), d);
  if (M.rows() <= kDenseEigenLimit) return dense_top(M, d);
  auto apply = [&](const auto& v, Eigen::VectorXd& w) { w.noalias() = M.selfadjointView<Eigen::Lower>() * v; };
  return lanczos_top(apply, M.rows(), d);
}

Embedding ase(const EigenPairs& eig) {
  Embedding e;
  e.eigvals = eig.values;
  e.signs = eig.values.unaryExpr([](double v) { return v > 0 ? 1.0 : -1.0; });
  e.U = eig.vectors;
  e.X = eig.vectors * eig.values.cwiseAbs().cwiseSqrt().asDiagonal();
  e.variant = EmbeddingVariant::ase;
  return e;
}

Embedding signed_ase(const EigenPairs& eig) {
  Embedding e = ase(eig);
  e.X = e.X * e.signs.asDiagonal();
  e.variant = EmbeddingVariant::signed_ase;
  return e;
}

Embedding ase(const Graph& A, int d) { return ase(top_d_eigen(A, d)); }
Embedding signed_ase(const Graph& A, int d) { return signed_ase(top_d_eigen(A, d)); }

Eigen::MatrixXd plugin_probs(const Embedding& ase_emb, const Embedding& signed_emb) {
  if (ase_emb.X.rows() != signed_emb.X.rows() || ase_emb.X.cols() != signed_emb.X.cols())
    throw std::invalid_argument("embeddings have different shapes");
  return ase_emb.X * signed_emb.X.transpose();
}

Eigen::VectorXd plugin_prob_row(const Embedding& ase_emb, const Embedding& signed_emb,
                                Eigen::Index i) {
  return signed_emb.X * ase_emb.X.row(i).transpose();
}

void write_embedding_csv(const Eigen::MatrixXd& X, std::ostream& out) {
  for (Eigen::Index k = 0; k < X.cols(); ++k) out << (k ? "," : "") << 'x' << (k + 1);
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index k = 0; k < X.cols(); ++k) out << (k ? "," : "") << X(i, k);
    out << '\n';
  }
}

}  // namespace sanvi
