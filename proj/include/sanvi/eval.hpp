#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sanvi {

struct AlignmentResult {
  Eigen::MatrixXd W;  // orthogonal, X_hat * W is aligned with X0
  double sse = 0.0;
};

/// min over orthogonal W (reflections included) of ||X_hat W - X0||_F^2.
/// Throws std::invalid_argument on a shape mismatch.
AlignmentResult procrustes_sse(const Eigen::MatrixXd& X_hat, const Eigen::MatrixXd& X0);

struct TTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  int df = 0;
};

/// Two-sided paired t-test on a - b. Throws std::invalid_argument on fewer
/// than two pairs, unequal lengths or zero variance of the differences.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct GmmModel {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;  // k x d
  std::vector<Eigen::MatrixXd> covariances;
  double log_likelihood = 0.0;
  int iterations = 0;
  std::vector<double> log_likelihood_trace;  // per EM iteration of the kept restart

  Eigen::Index k() const noexcept { return weights.size(); }
};

struct GmmOptions {
  int restarts = 20;
  int max_iters = 500;
  double tolerance = 1e-8;  // relative change of the log-likelihood
  unsigned threads = 1;
};

/// EM with full covariances from k-means++ starts; the restart with the
/// highest log-likelihood wins (ties go to the earlier restart). Each
/// covariance gets a ridge of 1e-6 * trace / d after every M step. Throws
/// std::invalid_argument if n < k (d + 1) and std::runtime_error if every
/// restart hits a non-finite likelihood.
GmmModel gmm_fit(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
                 const GmmOptions& options = {});

/// Per-row log of w_c N(x; m_c, S_c), n x k.
Eigen::MatrixXd gmm_log_joint(const GmmModel& model, const Eigen::MatrixXd& X);

/// Component with the largest responsibility for each row.
std::vector<int> gmm_assign(const GmmModel& model, const Eigen::MatrixXd& X);

/// Hubert-Arabie adjusted Rand index. Two partitions that are both trivial
/// (all together or all apart) score 1.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace sanvi
