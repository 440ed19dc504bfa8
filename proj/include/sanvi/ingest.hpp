#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sanvi/graph_model.hpp"

namespace sanvi {

/// Edges exactly as read: direction and duplicates kept.
struct RawNetwork {
  std::vector<std::pair<std::string, std::string>> edges;
  std::vector<std::string> nodes;  // first-appearance order
  std::map<std::string, int> labels;
};

/// Each line that is neither blank nor starts with '#' must hold at least two
/// whitespace-separated tokens; extra tokens (weights, timestamps) are
/// ignored. Throws std::invalid_argument naming the offending line.
RawNetwork parse_edge_list(std::istream& in);
RawNetwork parse_edge_list(std::string_view text);

/// Lines "node_id class_int", same comment rules. Later lines win.
std::map<std::string, int> parse_labels(std::istream& in);
std::map<std::string, int> parse_labels(std::string_view text);

inline constexpr int kMissingLabel = -1;

struct IngestedNetwork {
  Graph graph;
  std::vector<std::string> node_ids;  // row index -> original id
  std::unordered_map<std::string, std::size_t> node_map;  // original id -> row
  std::vector<int> labels;  // per row, kMissingLabel when unlabeled
  std::size_t self_loops = 0;

  bool fully_labeled() const;
};

/// Orders ids numerically when both are integers, otherwise as strings.
bool node_id_less(const std::string& a, const std::string& b);

/// Symmetrizes (an edge in either direction gives A_ij = A_ji = 1), collapses
/// duplicates, keeps self-loops and restricts to the largest connected
/// component; among equally large components the one holding the smallest id
/// wins. Rows follow node_id_less. Throws std::invalid_argument if there are
/// no edges.
IngestedNetwork to_undirected_lcc(const RawNetwork& raw);

/// "u v" lines with original ids, one per undirected edge; parses back to the
/// same network.
void write_canonical_edges(const IngestedNetwork& net, std::ostream& out);
/// Header "row,node_id,label".
void write_label_csv(const IngestedNetwork& net, std::ostream& out);

}  // namespace sanvi
