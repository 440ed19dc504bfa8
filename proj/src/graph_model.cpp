#include "sanvi/graph_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sanvi/rng.hpp"

namespace sanvi {

namespace {

// Rounding slack when checking that probabilities lie in [0, 1].
constexpr double kProbSlack = 1e-12;

// Substream tags for make_scenario.
constexpr std::uint64_t kBlockTag = 1;
constexpr std::uint64_t kThetaTag = 2;

Eigen::RowVectorXd weighted_row(const LatentConfig& c, std::size_t i) {
  return c.rho * c.X0.row(static_cast<Eigen::Index>(i)).cwiseProduct(
                     c.signature.metric().transpose());
}

}  // namespace

Eigen::VectorXd Signature::metric() const {
  Eigen::VectorXd m(d());
  for (int k = 0; k < d(); ++k) m[k] = k < p ? 1.0 : -1.0;
  return m;
}

void Signature::validate() const {
  if (p < 1) throw std::invalid_argument("signature requires p >= 1");
  if (q < 0) throw std::invalid_argument("signature requires q >= 0");
}

namespace {

void validate_structure(const LatentConfig& c) {
  c.signature.validate();
  if (c.X0.cols() != c.signature.d())
    throw std::invalid_argument("latent matrix has " + std::to_string(c.X0.cols()) +
                                " columns, signature needs " + std::to_string(c.signature.d()));
  if (!(c.rho > 0.0 && c.rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
  if (!c.X0.allFinite()) throw std::invalid_argument("latent matrix has non-finite entries");
  if (!c.labels.empty() && c.labels.size() != c.n())
    throw std::invalid_argument("labels length does not match vertex count");

  if (c.signature.q > 0) {
    const Eigen::MatrixXd cross =
        c.X0.leftCols(c.signature.p).transpose() * c.X0.rightCols(c.signature.q);
    if (cross.cwiseAbs().maxCoeff() > 1e-8 * static_cast<double>(c.n()))
      throw std::invalid_argument("first p columns are not orthogonal to last q columns");
  }
}

bool probability_in_range(double p) { return p >= -kProbSlack && p <= 1.0 + kProbSlack; }

}  // namespace

void LatentConfig::validate() const {
  validate_structure(*this);
  for (std::size_t i = 0; i < n(); ++i) {
    const Eigen::RowVectorXd wi = weighted_row(*this, i);
    for (std::size_t j = i; j < n(); ++j)
      if (!probability_in_range(wi.dot(X0.row(static_cast<Eigen::Index>(j)))))
        throw std::invalid_argument("edge probability outside [0, 1] at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
  }
}

Graph::Graph(std::size_t n, std::vector<std::uint8_t> cells) : n_(n), cells_(std::move(cells)) {
  if (cells_.size() != n_ * n_) throw std::invalid_argument("adjacency storage has wrong size");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      const auto a = cells_[i * n_ + j];
      if (a > 1) throw std::invalid_argument("adjacency entries must be 0 or 1");
      if (a != cells_[j * n_ + i]) throw std::invalid_argument("adjacency is not symmetric");
    }
  }
}

Graph Graph::from_edges(std::size_t n,
                        const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::uint8_t> cells(n * n, 0);
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) throw std::invalid_argument("edge endpoint out of range");
    cells[i * n + j] = 1;
    cells[j * n + i] = 1;
  }
  return Graph(n, std::move(cells));
}

Graph Graph::from_dense(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("adjacency must be square");
  const auto n = static_cast<std::size_t>(A.rows());
  std::vector<std::uint8_t> cells(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (a != 0.0 && a != 1.0) throw std::invalid_argument("adjacency entries must be 0 or 1");
      cells[i * n + j] = static_cast<std::uint8_t>(a);
    }
  }
  return Graph(n, std::move(cells));
}

std::size_t Graph::unit_entries() const noexcept {
  std::size_t count = 0;
  for (auto c : cells_) count += c;
  return count;
}

std::vector<std::vector<std::uint32_t>> Graph::adjacency_lists() const {
  std::vector<std::vector<std::uint32_t>> lists(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto* r = cells_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j)
      if (r[j]) lists[i].push_back(static_cast<std::uint32_t>(j));
  }
  return lists;
}

Eigen::MatrixXd Graph::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = cells_[static_cast<std::size_t>(i * n + j)];
  return A;
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "sbm5") return ScenarioKind::sbm5;
  if (name == "dcsbm2") return ScenarioKind::dcsbm2;
  if (name == "curve2d") return ScenarioKind::curve2d;
  if (name == "curve3d") return ScenarioKind::curve3d;
  throw std::invalid_argument("unknown scenario kind '" + std::string(name) + "'");
}

std::string_view to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::sbm5: return "sbm5";
    case ScenarioKind::dcsbm2: return "dcsbm2";
    case ScenarioKind::curve2d: return "curve2d";
    case ScenarioKind::curve3d: return "curve3d";
  }
  throw std::invalid_argument("unknown scenario kind");
}

Signature scenario_signature(ScenarioKind kind) {
  return kind == ScenarioKind::curve3d ? Signature{2, 1} : Signature{2, 0};
}

Graph sample_grdpg(const LatentConfig& config, std::uint64_t seed, DiagonalPolicy diagonal) {
  validate_structure(config);
  const std::size_t n = config.n();
  const Eigen::MatrixXd& X = config.X0;
  std::vector<std::uint8_t> cells(n * n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    SubstreamRng rng(seed, {i});
    const Eigen::RowVectorXd wi = weighted_row(config, i);
    for (std::size_t j = i; j < n; ++j) {
      double p = wi.dot(X.row(static_cast<Eigen::Index>(j)));
      if (!probability_in_range(p))
        throw std::invalid_argument("edge probability outside [0, 1] at (" + std::to_string(i) +
                                    ", " + std::to_string(j) + ")");
      p = std::clamp(p, 0.0, 1.0);
      std::uint8_t a = rng.uniform() < p ? 1 : 0;
      if (j == i && diagonal == DiagonalPolicy::zero) a = 0;
      cells[i * n + j] = a;
      cells[j * n + i] = a;
    }
  }
  return Graph(n, std::move(cells));
}

LatentConfig make_scenario(const ScenarioSpec& spec) {
  LatentConfig config;
  config.signature = scenario_signature(spec.kind);
  config.rho = 1.0;
  const auto d = config.signature.d();
  if (spec.n < static_cast<std::size_t>(d))
    throw std::invalid_argument("scenario needs n >= d");

  const auto n = static_cast<Eigen::Index>(spec.n);
  config.X0.resize(n, d);

  switch (spec.kind) {
    case ScenarioKind::sbm5: {
      const double blocks[5][2] = {{0.3, 0.3}, {0.5, 0.5}, {0.7, 0.7}, {0.3, 0.7}, {0.7, 0.3}};
      config.labels.resize(spec.n);
      for (Eigen::Index i = 0; i < n; ++i) {
        SubstreamRng rng(spec.seed, {kBlockTag, static_cast<std::uint64_t>(i)});
        std::uniform_int_distribution<int> pick(0, 4);
        const int k = pick(rng);
        config.labels[static_cast<std::size_t>(i)] = k;
        config.X0(i, 0) = blocks[k][0];
        config.X0(i, 1) = blocks[k][1];
      }
      break;
    }
    case ScenarioKind::dcsbm2: {
      const double s = std::sqrt(10.0) / 10.0;
      const double blocks[2][2] = {{3.0 * s, s}, {s, 3.0 * s}};
      config.labels.resize(spec.n);
      for (Eigen::Index i = 0; i < n; ++i) {
        SubstreamRng block_rng(spec.seed, {kBlockTag, static_cast<std::uint64_t>(i)});
        SubstreamRng theta_rng(spec.seed, {kThetaTag, static_cast<std::uint64_t>(i)});
        std::uniform_int_distribution<int> pick(0, 1);
        std::uniform_real_distribution<double> theta_dist(0.05, 0.95);
        const int k = pick(block_rng);
        const double theta = theta_dist(theta_rng);
        config.labels[static_cast<std::size_t>(i)] = k;
        config.X0(i, 0) = theta * blocks[k][0];
        config.X0(i, 1) = theta * blocks[k][1];
      }
      break;
    }
    case ScenarioKind::curve2d: {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n);
        config.X0(i, 0) = 0.15 * std::sin(std::numbers::pi * t) + 0.6;
        config.X0(i, 1) = 0.15 * std::cos(std::numbers::pi * t) + 0.6;
      }
      break;
    }
    case ScenarioKind::curve3d: {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n);
        config.X0(i, 0) = 0.15 * std::sin(2.0 * std::numbers::pi * t) + 0.6;
        config.X0(i, 1) = 0.15 * std::cos(2.0 * std::numbers::pi * t) + 0.6;
        config.X0(i, 2) = 0.15 * std::cos(4.0 * std::numbers::pi * t);
      }
      break;
    }
  }
  return config;
}

Eigen::MatrixXd edge_probability_matrix(const LatentConfig& config) {
  const Eigen::VectorXd m = config.signature.metric();
  return config.rho * (config.X0 * m.asDiagonal() * config.X0.transpose());
}

void write_edge_list(const Graph& graph, std::ostream& out) {
  out << "n " << graph.n() << '\n';
  for (std::size_t i = 0; i < graph.n(); ++i) {
    const auto r = graph.row(i);
    for (std::size_t j = i; j < graph.n(); ++j)
      if (r[j]) out << i << ' ' << j << '\n';
  }
}

Graph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  bool have_header = false;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (!have_header) {
      if (first != "n" || !(ls >> n))
        throw std::runtime_error("edge list line " + std::to_string(line_no) +
                                 ": expected header 'n <count>'");
      have_header = true;
      continue;
    }
    std::size_t j = 0;
    std::size_t i = 0;
    try {
      i = std::stoul(first);
    } catch (const std::exception&) {
      throw std::runtime_error("edge list line " + std::to_string(line_no) + ": bad vertex id");
    }
    if (!(ls >> j))
      throw std::runtime_error("edge list line " + std::to_string(line_no) + ": expected 'i j'");
    if (i >= n || j >= n)
      throw std::runtime_error("edge list line " + std::to_string(line_no) +
                               ": vertex out of range");
    edges.emplace_back(i, j);
  }
  if (!have_header) throw std::runtime_error("edge list is missing the 'n <count>' header");
  return Graph::from_edges(n, edges);
}

}  // namespace sanvi
