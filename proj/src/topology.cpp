#include "eigennet/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <queue>
#include <random>
#include <sstream>

#include "eigennet/eigencore.hpp"
#include "eigennet/rng.hpp"

namespace eigennet::topology {

Graph::Graph(int node_count, std::vector<Edge> edges) : node_count_(node_count) {
  if (node_count < 1) throw InvalidArgument("Graph: node count must be positive");
  for (auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= node_count || v >= node_count) {
      throw InvalidArgument("Graph: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") out of range for K=" + std::to_string(node_count));
    }
    if (u == v) throw InvalidArgument("Graph: self-loop at node " + std::to_string(u));
    if (u > v) std::swap(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  adjacency_.assign(static_cast<std::size_t>(node_count), {});
  for (const auto& [u, v] : edges_) {
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

bool Graph::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{u, v});
}

bool Graph::is_connected() const {
  if (node_count_ == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(node_count_), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adjacency_[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == node_count_;
}

void Graph::require_connected() const {
  if (!is_connected()) throw InvalidArgument("graph is not connected");
}

void Graph::set_positions(std::vector<Point2> positions) {
  if (static_cast<int>(positions.size()) != node_count_) {
    throw InvalidArgument("Graph::set_positions: expected one position per node");
  }
  positions_ = std::move(positions);
}

Graph Graph::with_edges(const std::vector<char>& alive) const {
  if (alive.size() != edges_.size()) throw InvalidArgument("Graph::with_edges: mask size");
  std::vector<Edge> kept;
  kept.reserve(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (alive[e]) kept.push_back(edges_[e]);
  }
  return Graph(node_count_, std::move(kept));
}

Graph Graph::complete(int node_count) {
  std::vector<Edge> edges;
  for (int u = 0; u < node_count; ++u) {
    for (int v = u + 1; v < node_count; ++v) edges.emplace_back(u, v);
  }
  return Graph(node_count, std::move(edges));
}

Graph Graph::path(int node_count) {
  std::vector<Edge> edges;
  for (int u = 0; u + 1 < node_count; ++u) edges.emplace_back(u, u + 1);
  return Graph(node_count, std::move(edges));
}

Graph generate_random_geometric(int node_count, double radius, std::uint64_t seed,
                                const GeometricOptions& options) {
  if (node_count < 2) throw InvalidArgument("generate_random_geometric: K must be >= 2");
  if (!(radius > 0.0)) throw InvalidArgument("generate_random_geometric: radius must be > 0");

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r2 = radius * radius;
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    std::vector<Point2> pts(static_cast<std::size_t>(node_count));
    for (auto& p : pts) {
      p.x = unit(rng);
      p.y = unit(rng);
    }
    std::vector<Edge> edges;
    for (int u = 0; u < node_count; ++u) {
      for (int v = u + 1; v < node_count; ++v) {
        const double dx = pts[u].x - pts[v].x;
        const double dy = pts[u].y - pts[v].y;
        if (dx * dx + dy * dy <= r2) edges.emplace_back(u, v);
      }
    }
    Graph g(node_count, std::move(edges));
    if (g.is_connected()) {
      g.set_positions(std::move(pts));
      return g;
    }
  }
  throw DegenerateRun("generate_random_geometric: no connected realization after " +
                      std::to_string(options.max_retries) + " attempts");
}

namespace {

// Strips comments and surrounding whitespace.
std::string_view clean_line(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  const auto first = line.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = line.find_last_not_of(" \t\r");
  return line.substr(first, last - first + 1);
}

}  // namespace

Graph parse_edge_list(std::string_view text) {
  std::optional<int> node_count;
  std::vector<Edge> edges;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = clean_line(raw);
    if (line.empty()) continue;

    std::istringstream ss{std::string(line)};
    std::string extra;
    if (!node_count) {
      int k = 0;
      if (!(ss >> k) || (ss >> extra) || k < 1) {
        throw ParseError("edge list line " + std::to_string(line_no) +
                         ": expected a positive node count");
      }
      node_count = k;
      continue;
    }
    long long u = 0;
    long long v = 0;
    if (!(ss >> u >> v) || (ss >> extra)) {
      throw ParseError("edge list line " + std::to_string(line_no) + ": expected 'u v'");
    }
    if (u < 0 || v < 0 || u >= *node_count || v >= *node_count) {
      throw InvalidArgument("edge list line " + std::to_string(line_no) +
                            ": node index out of range");
    }
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  if (!node_count) throw ParseError("edge list: missing node count");
  return Graph(*node_count, std::move(edges));
}

Graph load_edge_list(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_edge_list(buffer.str());
}

Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list file: " + path);
  return load_edge_list(in);
}

std::string format_edge_list(const Graph& g) {
  std::string out = std::to_string(g.node_count()) + "\n";
  for (const auto& [u, v] : g.edges()) {
    out += std::to_string(u) + " " + std::to_string(v) + "\n";
  }
  return out;
}

WeightMatrix metropolis_weights_unchecked(const Graph& g) {
  const int k = g.node_count();
  WeightMatrix out{RMatrix::Zero(k, k)};
  for (const auto& [u, v] : g.edges()) {
    const double w = 1.0 / (1.0 + std::max(g.degree(u), g.degree(v)));
    out.w(u, v) = w;
    out.w(v, u) = w;
  }
  for (int i = 0; i < k; ++i) {
    double off = 0.0;
    for (int j : g.neighbors(i)) off += out.w(i, j);
    out.w(i, i) = 1.0 - off;
  }
  return out;
}

WeightMatrix metropolis_weights(const Graph& g) {
  g.require_connected();
  return metropolis_weights_unchecked(g);
}

ChebyshevParams spectral_bounds(const WeightMatrix& w) {
  const int k = w.size();
  if (k < 2) throw InvalidArgument("spectral_bounds: need at least two nodes");
  eigencore::JacobiOptions opts;
  opts.want_vectors = false;
  const auto values = eigencore::dense_hermitian_eig(w.w, opts).values;

  ChebyshevParams p;
  p.lambda_max = values[1];
  p.lambda_min = std::max(values.back(), -1.0 + 1e-9);
  const double spread = p.lambda_max - p.lambda_min;
  if (spread <= 1e-12 * (1.0 + std::abs(p.lambda_max))) {
    p.lambda_min = p.lambda_max;
    p.degenerate = true;
    p.b1 = std::numeric_limits<double>::infinity();
  } else {
    p.b1 = (2.0 - p.lambda_max - p.lambda_min) / spread;
  }
  return p;
}

}  // namespace eigennet::topology
