#include "sanvi/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace sanvi {

namespace {

bool skip_line(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

std::optional<long long> as_integer(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

}  // namespace

RawNetwork parse_edge_list(std::istream& in) {
  RawNetwork raw;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::istringstream fields(line);
    std::string u, v;
    if (!(fields >> u >> v))
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": expected two node ids, got '" + line + "'");
    for (const auto& id : {u, v})
      if (seen.insert(id).second) raw.nodes.push_back(id);
    raw.edges.emplace_back(std::move(u), std::move(v));
  }
  return raw;
}

RawNetwork parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

std::map<std::string, int> parse_labels(std::istream& in) {
  std::map<std::string, int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::istringstream fields(line);
    std::string id, cls;
    std::optional<long long> value;
    if (fields >> id >> cls) value = as_integer(cls);
    if (!value)
      throw std::invalid_argument("label file line " + std::to_string(line_no) +
                                  ": expected 'node_id class_int', got '" + line + "'");
    labels[id] = static_cast<int>(*value);
  }
  return labels;
}

std::map<std::string, int> parse_labels(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_labels(in);
}

bool IngestedNetwork::fully_labeled() const {
  return std::none_of(labels.begin(), labels.end(), [](int l) { return l == kMissingLabel; });
}

bool node_id_less(const std::string& a, const std::string& b) {
  const auto ia = as_integer(a);
  const auto ib = as_integer(b);
  if (ia && ib) return *ia < *ib || (*ia == *ib && a < b);
  return a < b;
}

IngestedNetwork to_undirected_lcc(const RawNetwork& raw) {
  if (raw.edges.empty()) throw std::invalid_argument("network has no edges");

  std::vector<std::string> ids = raw.nodes;
  std::sort(ids.begin(), ids.end(), node_id_less);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

  const std::size_t total = ids.size();
  std::vector<std::vector<std::size_t>> adj(total);
  for (const auto& [u, v] : raw.edges) {
    const std::size_t a = index.at(u);
    const std::size_t b = index.at(v);
    adj[a].push_back(b);
    if (a != b) adj[b].push_back(a);
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }

  // Components are discovered in increasing id order, so on equal size the
  // first one found holds the smallest id.
  std::vector<int> component(total, -1);
  int best = -1;
  std::size_t best_size = 0;
  int count = 0;
  for (std::size_t s = 0; s < total; ++s) {
    if (component[s] != -1) continue;
    std::size_t size = 0;
    std::queue<std::size_t> frontier;
    frontier.push(s);
    component[s] = count;
    while (!frontier.empty()) {
      const std::size_t v = frontier.front();
      frontier.pop();
      ++size;
      for (std::size_t w : adj[v])
        if (component[w] == -1) {
          component[w] = count;
          frontier.push(w);
        }
    }
    if (size > best_size) {
      best_size = size;
      best = count;
    }
    ++count;
  }

  IngestedNetwork net;
  std::vector<std::size_t> row_of(total, 0);
  for (std::size_t v = 0; v < total; ++v) {
    if (component[v] != best) continue;
    row_of[v] = net.node_ids.size();
    net.node_map.emplace(ids[v], net.node_ids.size());
    net.node_ids.push_back(ids[v]);
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t v = 0; v < total; ++v) {
    if (component[v] != best) continue;
    for (std::size_t w : adj[v]) {
      if (w < v) continue;
      edges.emplace_back(row_of[v], row_of[w]);
      if (w == v) ++net.self_loops;
    }
  }
  net.graph = Graph::from_edges(net.node_ids.size(), edges);
  net.labels.reserve(net.node_ids.size());
  for (const auto& id : net.node_ids) {
    const auto it = raw.labels.find(id);
    net.labels.push_back(it == raw.labels.end() ? kMissingLabel : it->second);
  }
  return net;
}

void write_canonical_edges(const IngestedNetwork& net, std::ostream& out) {
  const std::size_t n = net.graph.n();
  out << "# undirected edges, original node ids\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = net.graph.row(i);
    for (std::size_t j = i; j < n; ++j)
      if (row[j]) out << net.node_ids[i] << ' ' << net.node_ids[j] << '\n';
  }
}

void write_label_csv(const IngestedNetwork& net, std::ostream& out) {
  out << "row,node_id,label\n";
  for (std::size_t i = 0; i < net.node_ids.size(); ++i)
    out << i << ',' << net.node_ids[i] << ',' << net.labels[i] << '\n';
}

}  // namespace sanvi
