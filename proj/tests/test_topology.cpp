#include <sstream>

#include "doctest.h"
#include "eigennet/eigencore.hpp"
#include "eigennet/topology.hpp"

using namespace eigennet;
using namespace eigennet::topology;

TEST_CASE("random geometric graph") {
  const Graph g2 = generate_random_geometric(2, 2.0, 123);
  CHECK(g2.edges() == std::vector<Edge>{{0, 1}});

  const Graph g40 = generate_random_geometric(40, 0.25, 1);
  CHECK(g40.node_count() == 40);
  CHECK(g40.is_connected());
  REQUIRE(g40.positions().has_value());
  CHECK(g40.positions()->size() == 40);

  CHECK_THROWS_AS(generate_random_geometric(5, 1e-9, 1), DegenerateRun);
  CHECK_THROWS_AS(generate_random_geometric(1, 0.5, 1), InvalidArgument);
  CHECK_THROWS_AS(generate_random_geometric(5, 0.0, 1), InvalidArgument);
}

TEST_CASE("random geometric graph is deterministic") {
  CHECK(generate_random_geometric(30, 0.3, 9).edges() == generate_random_geometric(30, 0.3, 9).edges());
}

TEST_CASE("edge list parsing") {
  const Graph p3 = parse_edge_list("3\n0 1\n1 2\n");
  CHECK(p3.edges() == std::vector<Edge>{{0, 1}, {1, 2}});
  CHECK(p3.is_connected());

  const Graph dup = parse_edge_list("2\n0 1\n0 1\n");
  CHECK(dup.edges().size() == 1);

  const Graph split = parse_edge_list("3\n0 1\n");
  CHECK_FALSE(split.is_connected());
  CHECK_THROWS_AS(split.require_connected(), InvalidArgument);

  const Graph commented = parse_edge_list("# ring\n3\n\n0 1 # first\n1 2\n2 0\n");
  CHECK(commented.edges().size() == 3);

  CHECK_THROWS_AS(parse_edge_list("3\n0 3\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_edge_list("3\n0 x\n"), ParseError);
  CHECK_THROWS_AS(parse_edge_list(""), ParseError);
  CHECK_THROWS_AS(parse_edge_list("2\n1 1\n"), InvalidArgument);
}

TEST_CASE("edge list round trip") {
  const Graph g = generate_random_geometric(12, 0.5, 4);
  std::istringstream in(format_edge_list(g));
  CHECK(load_edge_list(in).edges() == g.edges());
}

TEST_CASE("metropolis weights by hand") {
  const auto wc = metropolis_weights(Graph::complete(4)).w;
  CHECK((wc - RMatrix::Constant(4, 4, 0.25)).norm() < 1e-15);

  const auto wp = metropolis_weights(Graph::path(3)).w;
  RMatrix expected(3, 3);
  expected << 2.0 / 3, 1.0 / 3, 0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0, 1.0 / 3, 2.0 / 3;
  CHECK((wp - expected).norm() < 1e-15);

  const auto w2 = metropolis_weights(Graph::path(2)).w;
  CHECK((w2 - RMatrix::Constant(2, 2, 0.5)).norm() < 1e-15);

  CHECK_THROWS_AS(metropolis_weights(parse_edge_list("3\n0 1\n")), InvalidArgument);
}

TEST_CASE("spectral bounds") {
  const auto p3 = spectral_bounds(metropolis_weights(Graph::path(3)));
  CHECK(p3.lambda_min == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(p3.lambda_min) < 1e-12);
  CHECK(p3.lambda_max == doctest::Approx(2.0 / 3.0));
  CHECK(p3.b1 == doctest::Approx(2.0));
  CHECK_FALSE(p3.degenerate);

  const auto k2 = spectral_bounds(metropolis_weights(Graph::path(2)));
  CHECK(k2.degenerate);
  CHECK(std::abs(k2.lambda_max) < 1e-12);

  const Graph g = generate_random_geometric(20, 0.4, 2);
  const auto w = metropolis_weights(g);
  const auto b = spectral_bounds(w);
  const auto eig = eigencore::dense_hermitian_eig(w.w, {.want_vectors = false}).values;
  CHECK(std::abs(eig[0] - 1.0) < 1e-9);
  for (std::size_t i = 1; i < eig.size(); ++i) {
    CHECK(eig[i] <= b.lambda_max + 1e-12);
    CHECK(eig[i] >= b.lambda_min - 1e-12);
  }
  CHECK(b.b1 > 1.0);
}
