#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library code it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                     double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index size, double lo = -1.0,
                                     double hi = 1.0) {
  return random_matrix(rng, size, 1, lo, hi);
}

inline Eigen::VectorXd standard_normal(Rng& rng, Eigen::Index size) {
  std::normal_distribution<double> z;
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = z(rng);
  return v;
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index d) {
  Eigen::MatrixXd g(d, d);
  std::normal_distribution<double> z;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = z(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

/// Symmetric 0/1 matrix with independent upper-triangle entries.
inline std::vector<std::uint8_t> random_adjacency(Rng& rng, std::size_t n, double density,
                                                  bool loops = true) {
  std::bernoulli_distribution b(density);
  std::vector<std::uint8_t> cells(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const std::uint8_t a = (i == j && !loops) ? 0 : static_cast<std::uint8_t>(b(rng));
      cells[i * n + j] = a;
      cells[j * n + i] = a;
    }
  return cells;
}

/// Central differences of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd up = x, down = x;
    up[k] += h;
    down[k] -= h;
    g[k] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

/// Central differences of a vector function; column k is d f / d x_k.
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
    double h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Eigen::VectorXd up = x, down = x;
    up[k] += h;
    down[k] -= h;
    J.col(k) = (f(up) - f(down)) / (2.0 * h);
  }
  return J;
}

/// max |a - b| / max(1, max |b|).
inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// The log extension written out independently: quadratic below tau and
/// above 1, matched to log in value, slope and curvature.
inline double log_extension(double t, double tau) {
  if (t >= tau && t <= 1.0) return std::log(t);
  const double a = t < tau ? tau : 1.0;
  const double dt = t - a;
  return std::log(a) + dt / a - dt * dt / (2.0 * a * a);
}

inline double log_extension_slope(double t, double tau) {
  if (t >= tau && t <= 1.0) return 1.0 / t;
  const double a = t < tau ? tau : 1.0;
  return 1.0 / a - (t - a) / (a * a);
}

/// Surrogate log-likelihood evaluated by a plain loop over neighbors.
inline double naive_esl(const Eigen::MatrixXd& Xt, const std::vector<std::uint8_t>& row,
                        double tau, const Eigen::VectorXd& x) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < Xt.rows(); ++j) {
    const double u = Xt.row(j).dot(x);
    total += row[static_cast<std::size_t>(j)] ? log_extension(u, tau)
                                              : log_extension(1.0 - u, tau);
  }
  return total;
}

/// Brute-force ARI: counts agreeing pairs over all item pairs.
inline double pair_counting_ari(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double both = 0, in_a = 0, in_b = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = a[i] == a[j];
      const bool sb = b[i] == b[j];
      both += (sa && sb) ? 1 : 0;
      in_a += sa ? 1 : 0;
      in_b += sb ? 1 : 0;
      pairs += 1;
    }
  const double expected = in_a * in_b / pairs;
  const double best = 0.5 * (in_a + in_b);
  if (best == expected) return 1.0;
  return (both - expected) / (best - expected);
}

/// min over a grid of rotations and reflections in O(2) of ||X W - Y||_F^2.
inline double procrustes_grid_2d(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                 int angles = 3600) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < angles; ++k) {
    const double th = 2.0 * M_PI * k / angles;
    const double c = std::cos(th), s = std::sin(th);
    Eigen::Matrix2d rot, ref;
    rot << c, -s, s, c;
    ref << c, s, s, -c;
    best = std::min(best, (X * rot - Y).squaredNorm());
    best = std::min(best, (X * ref - Y).squaredNorm());
  }
  return best;
}

/// Refines the best grid angle by golden-section search on each branch, so
/// the brute-force answer is accurate well beyond the grid spacing.
inline double procrustes_grid_refined_2d(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                         int angles = 3600) {
  auto cost = [&](double th, bool reflect) {
    const double c = std::cos(th), s = std::sin(th);
    Eigen::Matrix2d w;
    if (reflect)
      w << c, s, s, -c;
    else
      w << c, -s, s, c;
    return (X * w - Y).squaredNorm();
  };
  double best = std::numeric_limits<double>::infinity();
  for (bool reflect : {false, true}) {
    int arg = 0;
    double arg_cost = std::numeric_limits<double>::infinity();
    const double step = 2.0 * M_PI / angles;
    for (int k = 0; k < angles; ++k) {
      const double v = cost(k * step, reflect);
      if (v < arg_cost) {
        arg_cost = v;
        arg = k;
      }
    }
    double lo = (arg - 1) * step, hi = (arg + 1) * step;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 200; ++it) {
      const double m1 = hi - phi * (hi - lo);
      const double m2 = lo + phi * (hi - lo);
      if (cost(m1, reflect) < cost(m2, reflect))
        hi = m2;
      else
        lo = m1;
    }
    best = std::min({best, arg_cost, cost(0.5 * (lo + hi), reflect)});
  }
  return best;
}

}  // namespace oracle
