#include "sanvi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/distributions/students_t.hpp>

#include "sanvi/parallel.hpp"
#include "sanvi/rng.hpp"

namespace sanvi {

AlignmentResult procrustes_sse(const Eigen::MatrixXd& X_hat, const Eigen::MatrixXd& X0) {
  if (X_hat.rows() != X0.rows() || X_hat.cols() != X0.cols())
    throw std::invalid_argument("procrustes_sse: shapes differ (" +
                                std::to_string(X_hat.rows()) + "x" +
                                std::to_string(X_hat.cols()) + " vs " +
                                std::to_string(X0.rows()) + "x" + std::to_string(X0.cols()) +
                                ")");
  const Eigen::MatrixXd cross = X_hat.transpose() * X0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  AlignmentResult result;
  result.W = svd.matrixU() * svd.matrixV().transpose();
  const double sse =
      X_hat.squaredNorm() + X0.squaredNorm() - 2.0 * svd.singularValues().sum();
  result.sse = std::max(0.0, sse);
  return result;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: lengths differ");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test: need at least two pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = a[i] - b[i] - mean;
    ss += r * r;
  }
  const double var = ss / (n - 1.0);
  if (!(var > 0.0)) throw std::invalid_argument("paired_t_test: zero variance of differences");

  TTestResult result;
  result.df = static_cast<int>(a.size()) - 1;
  result.t_stat = mean / std::sqrt(var / n);
  boost::math::students_t dist(static_cast<double>(result.df));
  result.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(result.t_stat)));
  result.p_value = std::min(1.0, result.p_value);
  return result;
}

namespace {

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& X) {
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(X.rows());
}

void add_ridge(Eigen::MatrixXd& S) {
  const auto d = static_cast<double>(S.rows());
  double ridge = 1e-6 * S.trace() / d;
  if (!(ridge > 0.0)) ridge = 1e-12;
  S.diagonal().array() += ridge;
}

Eigen::MatrixXd kmeanspp_centers(const Eigen::MatrixXd& X, int k, SubstreamRng& rng) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd centers(k, X.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = X.row(pick(rng));
  Eigen::VectorXd dist2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Eigen::Index chosen = pick(rng);
    if (total > 0.0) {
      double u = rng.uniform() * total;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= dist2[i];
        if (u < 0.0) {
          chosen = i;
          break;
        }
      }
    }
    centers.row(c) = X.row(chosen);
    dist2 = dist2.cwiseMin((X.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

// Runs EM from one k-means++ start; empty optional on a non-finite likelihood.
std::optional<GmmModel> em_restart(const Eigen::MatrixXd& X, int k, SubstreamRng rng,
                                   const GmmOptions& options) {
  const Eigen::Index n = X.rows();
  GmmModel model;
  model.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  model.means = kmeanspp_centers(X, k, rng);
  Eigen::MatrixXd global = sample_covariance(X);
  add_ridge(global);
  model.covariances.assign(static_cast<std::size_t>(k), global);

  double previous = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd resp(n, k);
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    // E step
    const Eigen::MatrixXd log_joint = gmm_log_joint(model, X);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = log_sum_exp(log_joint.row(i));
      ll += norm;
      resp.row(i) = (log_joint.row(i).array() - norm).exp();
    }
    if (!std::isfinite(ll)) return std::nullopt;
    model.log_likelihood = ll;
    model.log_likelihood_trace.push_back(ll);
    model.iterations = iter;
    if (std::abs(ll - previous) <= options.tolerance * std::abs(ll)) break;
    previous = ll;

    // M step
    const Eigen::VectorXd counts = resp.colwise().sum().transpose();
    for (int c = 0; c < k; ++c) {
      if (!(counts[c] > 0.0)) return std::nullopt;
      model.weights[c] = counts[c] / static_cast<double>(n);
      model.means.row(c) = resp.col(c).transpose() * X / counts[c];
      const Eigen::MatrixXd centered = X.rowwise() - model.means.row(c);
      Eigen::MatrixXd S =
          centered.transpose() * resp.col(c).asDiagonal() * centered / counts[c];
      S = (0.5 * (S + S.transpose())).eval();
      add_ridge(S);
      model.covariances[static_cast<std::size_t>(c)] = S;
    }
    if (!model.means.allFinite()) return std::nullopt;
  }
  return model;
}

}  // namespace

Eigen::MatrixXd gmm_log_joint(const GmmModel& model, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const Eigen::Index k = model.k();
  Eigen::MatrixXd out(n, k);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.covariances[static_cast<std::size_t>(c)]);
    if (llt.info() != Eigen::Success) {
      out.col(c).setConstant(-std::numeric_limits<double>::infinity());
      continue;
    }
    const Eigen::MatrixXd L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    const Eigen::MatrixXd centered = (X.rowwise() - model.means.row(c)).transpose();
    const Eigen::MatrixXd white = L.triangularView<Eigen::Lower>().solve(centered);
    const Eigen::VectorXd maha = white.colwise().squaredNorm().transpose();
    out.col(c) = (std::log(model.weights[c]) - 0.5 * (static_cast<double>(d) * log_2pi + log_det)) -
                 0.5 * maha.array();
  }
  return out;
}

GmmModel gmm_fit(const Eigen::MatrixXd& X, int k, std::uint64_t seed, const GmmOptions& options) {
  if (k < 1) throw std::invalid_argument("gmm_fit: k must be positive");
  if (options.restarts < 1) throw std::invalid_argument("gmm_fit: need at least one restart");
  if (X.rows() < static_cast<Eigen::Index>(k) * (X.cols() + 1))
    throw std::invalid_argument("gmm_fit: need at least k (d + 1) rows");
  if (!X.allFinite()) throw std::invalid_argument("gmm_fit: data contain non-finite values");

  std::vector<std::optional<GmmModel>> fits(static_cast<std::size_t>(options.restarts));
  parallel_for(fits.size(), options.threads, [&](std::size_t r) {
    fits[r] = em_restart(X, k, SubstreamRng(seed, {r}), options);
  });
  const GmmModel* best = nullptr;
  for (const auto& f : fits)
    if (f && (!best || f->log_likelihood > best->log_likelihood)) best = &*f;
  if (!best) throw std::runtime_error("gmm_fit: EM produced a non-finite likelihood on every restart");
  return *best;
}

std::vector<int> gmm_assign(const GmmModel& model, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd log_joint = gmm_log_joint(model, X);
  std::vector<int> labels(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::Index arg = 0;
    log_joint.row(i).maxCoeff(&arg);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return labels;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: lengths differ");
  if (a.size() < 2) throw std::invalid_argument("adjusted_rand_index: need at least two items");
  auto pairs = [](double m) { return m * (m - 1.0) / 2.0; };

  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : cells) index += pairs(count);
  for (const auto& [key, count] : rows) sum_a += pairs(count);
  for (const auto& [key, count] : cols) sum_b += pairs(count);
  const double expected = sum_a * sum_b / pairs(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace sanvi
