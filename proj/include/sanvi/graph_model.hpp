#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sanvi {

/// Counts of +1 and -1 entries of the indefinite metric I_{p,q}.
struct Signature {
  int p = 1;
  int q = 0;

  int d() const noexcept { return p + q; }
  /// Diagonal of I_{p,q}: p ones followed by q minus ones.
  Eigen::VectorXd metric() const;
  /// Throws std::invalid_argument unless p >= 1 and q >= 0.
  void validate() const;

  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Ground-truth latent positions. Edge probabilities are
/// rho * x_i^T I_{p,q} x_j.
struct LatentConfig {
  Eigen::MatrixXd X0;  // n x d
  Signature signature;
  double rho = 1.0;
  /// Block memberships for block-model scenarios; empty otherwise.
  std::vector<int> labels;

  std::size_t n() const noexcept { return static_cast<std::size_t>(X0.rows()); }
  /// Checks shape, rho range, column-block orthogonality and that every edge
  /// probability lies in [0, 1]. Throws std::invalid_argument.
  void validate() const;
};

/// Symmetric binary adjacency matrix, dense row-major storage. Self-loops are
/// permitted. Immutable once constructed.
class Graph {
 public:
  Graph() = default;
  /// `cells` is the row-major n*n matrix; must be symmetric with entries in {0,1}.
  Graph(std::size_t n, std::vector<std::uint8_t> cells);

  /// Builds from undirected pairs; duplicates collapse, (i,i) marks a self-loop.
  static Graph from_edges(std::size_t n,
                          const std::vector<std::pair<std::size_t, std::size_t>>& edges);
  /// Accepts any symmetric matrix whose entries are exactly 0 or 1.
  static Graph from_dense(const Eigen::MatrixXd& A);

  std::size_t n() const noexcept { return n_; }
  std::uint8_t operator()(std::size_t i, std::size_t j) const noexcept {
    return cells_[i * n_ + j];
  }
  std::span<const std::uint8_t> row(std::size_t i) const noexcept {
    return {cells_.data() + i * n_, n_};
  }
  /// Number of unit cells in the matrix (an off-diagonal edge counts twice).
  std::size_t unit_entries() const noexcept;
  /// Neighbor lists (including self) in increasing order.
  std::vector<std::vector<std::uint32_t>> adjacency_lists() const;
  Eigen::MatrixXd to_dense() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

enum class ScenarioKind { sbm5, dcsbm2, curve2d, curve3d };

ScenarioKind parse_scenario_kind(std::string_view name);
std::string_view to_string(ScenarioKind kind);
/// (d, p, q) fixed by the scenario.
Signature scenario_signature(ScenarioKind kind);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::sbm5;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

enum class DiagonalPolicy { sample, zero };

/// Draws A with A_ij ~ Bernoulli(rho x_i^T I_{p,q} x_j) for i <= j and mirrors
/// the upper triangle. DiagonalPolicy::zero still consumes the diagonal draws
/// but stores 0, so off-diagonal entries are the same under both policies.
/// Deterministic in `seed`.
Graph sample_grdpg(const LatentConfig& config, std::uint64_t seed,
                   DiagonalPolicy diagonal = DiagonalPolicy::sample);

/// Latent positions for the four simulation scenarios:
///   sbm5    five blocks at [.3,.3] [.5,.5] [.7,.7] [.3,.7] [.7,.3]
///   dcsbm2  two blocks at [3,1]/sqrt(10), [1,3]/sqrt(10), scaled by
///           theta_i ~ Uniform(0.05, 0.95)
///   curve2d [0.15 sin(pi t) + 0.6, 0.15 cos(pi t) + 0.6], t = i/n
///   curve3d [0.15 sin(2 pi t) + 0.6, 0.15 cos(2 pi t) + 0.6, 0.15 cos(4 pi t)],
///           signature (2,1)
/// Block draws use a per-vertex substream so vertex i is unaffected by n.
LatentConfig make_scenario(const ScenarioSpec& spec);

/// rho * X0 I_{p,q} X0^T.
Eigen::MatrixXd edge_probability_matrix(const LatentConfig& config);

/// "n <count>" header followed by one "i j" line (i <= j, 0-based) per edge.
void write_edge_list(const Graph& graph, std::ostream& out);
Graph read_edge_list(std::istream& in);

}  // namespace sanvi
