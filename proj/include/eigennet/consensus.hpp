#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "eigennet/rng.hpp"
#include "eigennet/topology.hpp"
#include "eigennet/types.hpp"

/// Average consensus: maps a K x m input (row k held by node k) to an
/// approximation of the broadcast network mean, and exposes the realized
/// error E_t = Z_t - (1/K) 1 1^T Z_0.
namespace eigennet::consensus {

enum class Engine { ideal, standard, chebyshev };

std::string_view to_string(Engine engine);
Engine engine_from_string(std::string_view name);

struct AcConfig {
  Engine engine = Engine::ideal;
  int iterations = 0;
  /// Per-iteration, per-edge independent failure probability in [0, 1).
  double link_failure_prob = 0.0;
  topology::Graph graph;
  topology::WeightMatrix weights;
  std::optional<topology::ChebyshevParams> cheb;
  /// Seed of the link-failure stream.
  std::uint64_t seed = 0;

  /// Builds a config on a connected graph with Metropolis weights (and
  /// spectral bounds when the engine is Chebyshev).
  static AcConfig make(Engine engine, int iterations, const topology::Graph& graph,
                       double link_failure_prob = 0.0, std::uint64_t seed = 0);

  /// Throws InvalidArgument when fields are inconsistent.
  void validate() const;
};

struct ConsensusResult {
  CMatrix z;      // K x m output Z_t
  CMatrix error;  // Z_t - (1/K) 1 1^T Z_0
  int iterations_used = 0;
  /// Scalars sent by each node during this run: t * m * d(k).
  std::vector<long long> scalars_sent;
};

/// A consensus routine as seen by the decentralized algorithms. Each call to
/// run() is one AC_m^t invocation; implementations may keep state across
/// calls (e.g. a link-failure random stream).
class Consensus {
 public:
  virtual ~Consensus() = default;
  virtual ConsensusResult run(const CMatrix& z0) = 0;
  [[nodiscard]] virtual int node_count() const = 0;
  [[nodiscard]] virtual int iterations() const = 0;
};

/// Ideal, standard (W_t ... W_1 Z_0) or Chebyshev-accelerated consensus.
class SimulatedConsensus final : public Consensus {
 public:
  explicit SimulatedConsensus(AcConfig config);

  ConsensusResult run(const CMatrix& z0) override;
  [[nodiscard]] int node_count() const override { return config_.graph.node_count(); }
  [[nodiscard]] int iterations() const override { return config_.iterations; }
  [[nodiscard]] const AcConfig& config() const noexcept { return config_; }

 private:
  using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  struct SparseWeights {
    std::vector<int> row_start;
    std::vector<int> col;
    std::vector<double> val;
  };

  [[nodiscard]] SparseWeights compress(const topology::WeightMatrix& w) const;
  const SparseWeights& iteration_weights();
  static void apply(const SparseWeights& w, const RowMatrix& x, RowMatrix& y);

  AcConfig config_;
  SparseWeights nominal_;
  SparseWeights realized_;
  Rng failures_;
};

/// Error-injection engine: returns (1/K) 1 1^T Z_0 + E where E is supplied by
/// the caller for each call (by call index). An empty matrix means E = 0.
/// Message counters follow the nominal graph and iteration count.
class InjectedConsensus final : public Consensus {
 public:
  using Injector = std::function<CMatrix(int call_index, const CMatrix& z0)>;

  InjectedConsensus(topology::Graph graph, int iterations, Injector injector);

  ConsensusResult run(const CMatrix& z0) override;
  [[nodiscard]] int node_count() const override { return graph_.node_count(); }
  [[nodiscard]] int iterations() const override { return iterations_; }

 private:
  topology::Graph graph_;
  int iterations_;
  Injector injector_;
  int calls_ = 0;
};

std::unique_ptr<Consensus> make_consensus(const AcConfig& config);

/// One-shot consensus with a fresh failure stream seeded from config.seed.
ConsensusResult run_consensus(const CMatrix& z0, const AcConfig& config);

/// Row k of Z_t, i.e. node k's local view AC_m^t[k].
CVector node_view(const ConsensusResult& result, int k);

/// Broadcast mean (1/K) 1 1^T Z_0.
CMatrix exact_average(const CMatrix& z0);

/// Chebyshev scalar sequence tau_0..tau_t: tau_0 = 1, tau_1 = b1,
/// tau_{s+1} = 2 b1 tau_s - tau_{s-1}.
std::vector<double> chebyshev_tau(double b1, int t);

}  // namespace eigennet::consensus
