#include <doctest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sanvi/ingest.hpp"

using namespace sanvi;

TEST_CASE("edge list: two edges, three nodes") {
  const RawNetwork raw = parse_edge_list("a b\nb c");
  CHECK(raw.edges.size() == 2);
  CHECK(raw.nodes == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("edge list: comments, blanks, extra columns and duplicates") {
  const RawNetwork raw = parse_edge_list("# header\n\n  \na b 0.5\n\tb\ta\n# x y\na b\n");
  REQUIRE(raw.edges.size() == 3);
  CHECK(raw.edges[0] == std::pair<std::string, std::string>{"a", "b"});
  CHECK(raw.edges[1] == std::pair<std::string, std::string>{"b", "a"});
  CHECK(raw.edges[2] == std::pair<std::string, std::string>{"a", "b"});
  CHECK(raw.nodes.size() == 2);
}

TEST_CASE("edge list: malformed line names its number") {
  try {
    parse_edge_list("a b\n# ok\nlonely\n");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("label file") {
  const auto labels = parse_labels("# id class\na 0\nb 1\na 1\n");
  CHECK(labels.size() == 2);
  CHECK(labels.at("a") == 1);
  CHECK(labels.at("b") == 1);
  CHECK_THROWS_AS(parse_labels("a x\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_labels("a\n"), std::invalid_argument);
}

TEST_CASE("largest component of a path plus an isolated edge") {
  RawNetwork raw = parse_edge_list("a b\nb c\nd e\n");
  raw.labels = {{"a", 0}, {"b", 1}, {"d", 1}};
  const IngestedNetwork net = to_undirected_lcc(raw);
  CHECK(net.graph.n() == 3);
  CHECK(net.node_ids == std::vector<std::string>{"a", "b", "c"});
  CHECK(net.labels == std::vector<int>{0, 1, kMissingLabel});
  CHECK_FALSE(net.fully_labeled());
  CHECK(net.graph(0, 1) == 1);
  CHECK(net.graph(1, 2) == 1);
  CHECK(net.graph(0, 2) == 0);
}

TEST_CASE("isolated node listed only via an edge to itself is a separate component") {
  const IngestedNetwork net = to_undirected_lcc(parse_edge_list("a b\nb c\nd d\n"));
  CHECK(net.graph.n() == 3);
  CHECK(net.self_loops == 0);
}

TEST_CASE("reciprocal directed pair becomes one undirected edge") {
  const IngestedNetwork net = to_undirected_lcc(parse_edge_list("a b\nb a\na b\n"));
  CHECK(net.graph.n() == 2);
  CHECK(net.graph.unit_entries() == 2);
}

TEST_CASE("self-loops inside the component are kept and counted") {
  const IngestedNetwork net = to_undirected_lcc(parse_edge_list("1 2\n2 2\n2 3\n"));
  CHECK(net.self_loops == 1);
  CHECK(net.graph(1, 1) == 1);
  CHECK(net.graph.unit_entries() == 5);
}

TEST_CASE("equal components: the one with the smallest id wins") {
  const IngestedNetwork net = to_undirected_lcc(parse_edge_list("9 10\n3 4\n"));
  CHECK(net.node_ids == std::vector<std::string>{"3", "4"});
  const IngestedNetwork named = to_undirected_lcc(parse_edge_list("x y\nb c\n"));
  CHECK(named.node_ids == std::vector<std::string>{"b", "c"});
}

TEST_CASE("numeric ids sort numerically") {
  CHECK(node_id_less("2", "10"));
  CHECK_FALSE(node_id_less("10", "2"));
  CHECK(node_id_less("10", "a"));
  CHECK(node_id_less("abc", "abd"));
  const IngestedNetwork net = to_undirected_lcc(parse_edge_list("10 2\n2 1\n"));
  CHECK(net.node_ids == std::vector<std::string>{"1", "2", "10"});
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(to_undirected_lcc(parse_edge_list("# nothing\n")), std::invalid_argument);
}

TEST_CASE("random networks: symmetric, bijective map, idempotent export") {
  oracle::Rng rng(1);
  std::uniform_int_distribution<int> node(0, 59);
  for (int trial = 0; trial < 30; ++trial) {
    std::ostringstream text;
    for (int e = 0; e < 70; ++e) text << "n" << node(rng) << ' ' << "n" << node(rng) << '\n';
    const IngestedNetwork net = to_undirected_lcc(parse_edge_list(text.str()));
    const std::size_t n = net.graph.n();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) CHECK(net.graph(i, j) == net.graph(j, i));

    REQUIRE(net.node_map.size() == n);
    std::set<std::size_t> rows;
    for (const auto& [id, row] : net.node_map) {
      CHECK(net.node_ids[row] == id);
      rows.insert(row);
    }
    CHECK(rows.size() == n);
    CHECK(*rows.rbegin() == n - 1);

    std::ostringstream exported;
    write_canonical_edges(net, exported);
    const IngestedNetwork again = to_undirected_lcc(parse_edge_list(exported.str()));
    CHECK(again.graph.n() == n);
    CHECK(again.graph.unit_entries() == net.graph.unit_entries());
    CHECK(again.node_ids == net.node_ids);
  }
}

TEST_CASE("label CSV") {
  RawNetwork raw = parse_edge_list("a b\n");
  raw.labels = {{"a", 0}, {"b", 1}};
  const IngestedNetwork net = to_undirected_lcc(raw);
  CHECK(net.fully_labeled());
  std::ostringstream csv;
  write_label_csv(net, csv);
  CHECK(csv.str() == "row,node_id,label\n0,a,0\n1,b,1\n");
}
