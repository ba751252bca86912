#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eigennet/types.hpp"

namespace eigennet::topology {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Edge = std::pair<int, int>;

/// Undirected simple graph on nodes 0..K-1.
///
/// Edges are stored normalized (u < v), sorted and unique. Connectivity is
/// not enforced at construction; simulation entry points call
/// require_connected().
class Graph {
 public:
  Graph() = default;
  /// Throws InvalidArgument on self-loops or out-of-range endpoints.
  /// Duplicate edges are collapsed.
  Graph(int node_count, std::vector<Edge> edges);

  [[nodiscard]] int node_count() const noexcept { return node_count_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<int>& neighbors(int k) const { return adjacency_.at(k); }
  [[nodiscard]] int degree(int k) const { return static_cast<int>(adjacency_.at(k).size()); }
  [[nodiscard]] bool has_edge(int u, int v) const;
  [[nodiscard]] bool is_connected() const;
  void require_connected() const;

  [[nodiscard]] const std::optional<std::vector<Point2>>& positions() const noexcept {
    return positions_;
  }
  void set_positions(std::vector<Point2> positions);

  /// Subgraph keeping only edges with alive[e] != 0 (same node set).
  [[nodiscard]] Graph with_edges(const std::vector<char>& alive) const;

  static Graph complete(int node_count);
  static Graph path(int node_count);

 private:
  int node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::optional<std::vector<Point2>> positions_;
};

struct GeometricOptions {
  int max_retries = 100;
};

/// Uniform points in the unit square, edge iff distance <= radius. Redraws
/// until the graph is connected; throws DegenerateRun once the retry budget
/// is spent.
Graph generate_random_geometric(int node_count, double radius, std::uint64_t seed,
                                const GeometricOptions& options = {});

/// Edge-list text: first line "K", then one "u v" pair per line.
/// Blank lines and '#' comments are ignored.
Graph parse_edge_list(std::string_view text);
Graph load_edge_list(std::istream& in);
Graph load_edge_list_file(const std::string& path);
std::string format_edge_list(const Graph& g);

/// Symmetric, row-stochastic consensus weights with the sparsity of a graph.
struct WeightMatrix {
  RMatrix w;
  [[nodiscard]] int size() const noexcept { return static_cast<int>(w.rows()); }
};

/// W_ij = 1 / (1 + max(d_i, d_j)) on edges, W_ii = 1 - sum_{j != i} W_ij.
/// Requires a connected graph.
WeightMatrix metropolis_weights(const Graph& g);
/// Same formula without the connectivity requirement (used for link-failure
/// realizations, where the surviving subgraph may split).
WeightMatrix metropolis_weights_unchecked(const Graph& g);

/// Spectral bounds of W on the disagreement subspace (orthogonal complement of
/// the all-ones vector), feeding Chebyshev acceleration.
struct ChebyshevParams {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  /// (2 - lambda_max - lambda_min) / (lambda_max - lambda_min); +inf when degenerate.
  double b1 = 0.0;
  /// lambda_min == lambda_max: W acts as a scaled projector and a single
  /// polynomial step (W - lambda I) / (1 - lambda) averages exactly.
  bool degenerate = false;
};

/// lambda_max = second-largest and lambda_min = smallest eigenvalue of W,
/// from the dense Jacobi oracle; lambda_min clamped to >= -1 + 1e-9.
ChebyshevParams spectral_bounds(const WeightMatrix& w);

}  // namespace eigennet::topology
