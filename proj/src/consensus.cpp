#include "eigennet/consensus.hpp"

#include <cmath>
#include <random>
#include <string>

namespace eigennet::consensus {

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::ideal: return "ideal";
    case Engine::standard: return "standard";
    case Engine::chebyshev: return "chebyshev";
  }
  return "unknown";
}

Engine engine_from_string(std::string_view name) {
  if (name == "ideal") return Engine::ideal;
  if (name == "standard" || name == "metropolis") return Engine::standard;
  if (name == "chebyshev") return Engine::chebyshev;
  throw InvalidArgument("unknown consensus engine: " + std::string(name));
}

AcConfig AcConfig::make(Engine engine, int iterations, const topology::Graph& graph,
                        double link_failure_prob, std::uint64_t seed) {
  AcConfig cfg;
  cfg.engine = engine;
  cfg.iterations = iterations;
  cfg.link_failure_prob = link_failure_prob;
  cfg.graph = graph;
  cfg.weights = topology::metropolis_weights(graph);
  if (engine == Engine::chebyshev) cfg.cheb = topology::spectral_bounds(cfg.weights);
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

void AcConfig::validate() const {
  if (iterations < 0) throw InvalidArgument("AcConfig: iterations must be >= 0");
  if (!(link_failure_prob >= 0.0 && link_failure_prob < 1.0)) {
    throw InvalidArgument("AcConfig: link failure probability must lie in [0, 1)");
  }
  if (graph.node_count() < 1) throw InvalidArgument("AcConfig: empty graph");
  graph.require_connected();
  if (weights.size() != graph.node_count()) {
    throw InvalidArgument("AcConfig: weight matrix does not match the graph");
  }
  if (engine == Engine::chebyshev && !cheb) {
    throw InvalidArgument("AcConfig: chebyshev engine requires spectral bounds");
  }
}

CMatrix exact_average(const CMatrix& z0) {
  const auto k = z0.rows();
  const Eigen::RowVectorXcd mean = z0.colwise().sum() / static_cast<double>(k);
  return mean.replicate(k, 1);
}

namespace {

std::vector<long long> count_messages(const topology::Graph& g, int iterations, Eigen::Index width) {
  std::vector<long long> sent(static_cast<std::size_t>(g.node_count()));
  for (int k = 0; k < g.node_count(); ++k) {
    sent[k] = static_cast<long long>(iterations) * static_cast<long long>(width) * g.degree(k);
  }
  return sent;
}

}  // namespace

SimulatedConsensus::SimulatedConsensus(AcConfig config)
    : config_(std::move(config)), failures_(config_.seed) {
  config_.validate();
  nominal_ = compress(config_.weights);
}

SimulatedConsensus::SparseWeights SimulatedConsensus::compress(const topology::WeightMatrix& w) const {
  SparseWeights s;
  const int k = w.size();
  s.row_start.reserve(static_cast<std::size_t>(k) + 1);
  s.row_start.push_back(0);
  for (int i = 0; i < k; ++i) {
    s.col.push_back(i);
    s.val.push_back(w.w(i, i));
    for (int j : config_.graph.neighbors(i)) {
      if (w.w(i, j) != 0.0) {
        s.col.push_back(j);
        s.val.push_back(w.w(i, j));
      }
    }
    s.row_start.push_back(static_cast<int>(s.col.size()));
  }
  return s;
}

const SimulatedConsensus::SparseWeights& SimulatedConsensus::iteration_weights() {
  if (config_.link_failure_prob == 0.0) return nominal_;
  std::bernoulli_distribution fails(config_.link_failure_prob);
  std::vector<char> alive(config_.graph.edges().size());
  for (auto& a : alive) a = fails(failures_) ? 0 : 1;
  realized_ = compress(topology::metropolis_weights_unchecked(config_.graph.with_edges(alive)));
  return realized_;
}

void SimulatedConsensus::apply(const SparseWeights& w, const RowMatrix& x, RowMatrix& y) {
  const auto rows = static_cast<int>(w.row_start.size()) - 1;
  for (int i = 0; i < rows; ++i) {
    auto out = y.row(i);
    out.setZero();
    for (int e = w.row_start[i]; e < w.row_start[i + 1]; ++e) {
      out += w.val[e] * x.row(w.col[e]);
    }
  }
}

ConsensusResult SimulatedConsensus::run(const CMatrix& z0) {
  const int k = node_count();
  if (z0.rows() != k) {
    throw InvalidArgument("consensus: input has " + std::to_string(z0.rows()) +
                          " rows, graph has " + std::to_string(k) + " nodes");
  }
  const int t = config_.iterations;
  ConsensusResult out;
  out.iterations_used = t;
  out.scalars_sent = count_messages(config_.graph, t, z0.cols());
  const CMatrix mean = exact_average(z0);

  if (config_.engine == Engine::ideal) {
    out.z = mean;
    out.error = CMatrix::Zero(z0.rows(), z0.cols());
    return out;
  }

  RowMatrix x = z0;
  RowMatrix y(x.rows(), x.cols());
  if (config_.engine == Engine::standard) {
    for (int s = 0; s < t; ++s) {
      apply(iteration_weights(), x, y);
      x.swap(y);
    }
  } else {
    const auto& cheb = *config_.cheb;
    const double lmax = cheb.lambda_max;
    const double lmin = cheb.lambda_min;
    if (cheb.degenerate) {
      // p(W) = (W - lambda I) / (1 - lambda) annihilates the disagreement part.
      for (int s = 0; s < t; ++s) {
        apply(iteration_weights(), x, y);
        x = (y - lmax * x) / (1.0 - lmax);
      }
    } else {
      // B = (2W - (lmax + lmin) I) / (lmax - lmin); x_t = T_t(B) x_0 / T_t(b1).
      // Coefficients use the ratio r_s = tau_{s-1} / tau_s to avoid overflow.
      const double spread = lmax - lmin;
      const double shift = lmax + lmin;
      const double b1 = cheb.b1;
      RowMatrix prev;
      double ratio = 1.0 / b1;
      for (int s = 0; s < t; ++s) {
        apply(iteration_weights(), x, y);
        RowMatrix bx = (2.0 * y - shift * x) / spread;
        if (s == 0) {
          prev = x;
          x = bx / b1;
        } else {
          const double denom = 2.0 * b1 - ratio;
          RowMatrix next = (2.0 / denom) * bx - (ratio / denom) * prev;
          prev = std::move(x);
          x = std::move(next);
          ratio = 1.0 / denom;
        }
      }
    }
  }
  out.z = x;
  out.error = out.z - mean;
  return out;
}

InjectedConsensus::InjectedConsensus(topology::Graph graph, int iterations, Injector injector)
    : graph_(std::move(graph)), iterations_(iterations), injector_(std::move(injector)) {
  if (iterations_ < 0) throw InvalidArgument("InjectedConsensus: iterations must be >= 0");
}

ConsensusResult InjectedConsensus::run(const CMatrix& z0) {
  if (z0.rows() != graph_.node_count()) throw InvalidArgument("consensus: dimension mismatch");
  ConsensusResult out;
  out.iterations_used = iterations_;
  out.scalars_sent = count_messages(graph_, iterations_, z0.cols());
  const CMatrix mean = exact_average(z0);
  CMatrix injected = injector_ ? injector_(calls_, z0) : CMatrix();
  ++calls_;
  if (injected.size() == 0) {
    out.z = mean;
    out.error = CMatrix::Zero(z0.rows(), z0.cols());
    return out;
  }
  if (injected.rows() != z0.rows() || injected.cols() != z0.cols()) {
    throw InvalidArgument("InjectedConsensus: injected error has the wrong shape");
  }
  out.z = mean + injected;
  out.error = out.z - mean;
  return out;
}

std::unique_ptr<Consensus> make_consensus(const AcConfig& config) {
  return std::make_unique<SimulatedConsensus>(config);
}

ConsensusResult run_consensus(const CMatrix& z0, const AcConfig& config) {
  SimulatedConsensus engine(config);
  return engine.run(z0);
}

CVector node_view(const ConsensusResult& result, int k) {
  if (k < 0 || k >= result.z.rows()) {
    throw InvalidArgument("node_view: node index " + std::to_string(k) + " out of range");
  }
  return result.z.row(k).transpose();
}

std::vector<double> chebyshev_tau(double b1, int t) {
  std::vector<double> tau;
  tau.reserve(static_cast<std::size_t>(t) + 1);
  tau.push_back(1.0);
  if (t >= 1) tau.push_back(b1);
  for (int s = 1; s < t; ++s) tau.push_back(2.0 * b1 * tau[s] - tau[s - 1]);
  return tau;
}

}  // namespace eigennet::consensus
