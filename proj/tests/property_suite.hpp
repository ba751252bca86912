#pragma once

// Randomized invariant checks, each run over `cases` seeded instances.
// Shared by the unit suite and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "eigennet/consensus.hpp"
#include "eigennet/dec_eig.hpp"
#include "eigennet/detection.hpp"
#include "eigennet/eigencore.hpp"
#include "eigennet/harness.hpp"
#include "eigennet/rng.hpp"
#include "eigennet/signal_model.hpp"
#include "eigennet/topology.hpp"
#include "test_support.hpp"

namespace eigennet::testing {

struct PropertyResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  [[nodiscard]] bool ok() const { return failures == 0 && cases > 0; }
};

class PropertyRunner {
 public:
  explicit PropertyRunner(std::string name, int cases) { result_.name = std::move(name), result_.cases = cases; }

  // body returns an empty string on success, a description otherwise.
  PropertyResult run(const std::function<std::string(std::uint64_t seed, int index)>& body) {
    for (int i = 0; i < result_.cases; ++i) {
      std::string failure;
      try {
        failure = body(trial_seed(0xC0FFEEULL + std::hash<std::string>{}(result_.name) % 1000, i), i);
      } catch (const std::exception& e) {
        failure = std::string("exception: ") + e.what();
      }
      if (!failure.empty()) {
        if (result_.failures == 0) result_.first_failure = "case " + std::to_string(i) + ": " + failure;
        ++result_.failures;
      }
    }
    return result_;
  }

 private:
  PropertyResult result_;
};

namespace detail {

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline topology::Graph random_graph(Rng& rng, int k) {
  return topology::generate_random_geometric(k, uniform(rng, 0.45, 0.9), rng());
}

inline std::string fmt(const char* what, double value) {
  std::ostringstream os;
  os.precision(17);
  os << what << ' ' << value;
  return os.str();
}

inline eigencore::TridiagonalMatrix random_tridiagonal(Rng& rng, int size) {
  eigencore::TridiagonalMatrix t;
  for (int i = 0; i < size; ++i) t.alpha.push_back(uniform(rng, -5.0, 5.0));
  for (int i = 1; i < size; ++i) t.beta.push_back(uniform(rng, 0.0, 3.0));
  return t;
}

}  // namespace detail

/// Number of leading Lanczos steps before a numerical breakdown (beta below
/// 1e-8 ||R||_F). Past it the recurrence divides rounding noise by beta.
inline int lanczos_trusted_length(const eigencore::TridiagonalMatrix& t, double r_norm) {
  for (std::size_t j = 0; j < t.beta.size(); ++j) {
    if (t.beta[j] < 1e-8 * r_norm) return static_cast<int>(j) + 1;
  }
  return t.size();
}

/// Empty when every node's first `len` alpha and beta entries match the
/// reference within 1e-12 relative.
inline std::string compare_tridiagonals(const std::vector<eigencore::TridiagonalMatrix>& nodes,
                                        const eigencore::TridiagonalMatrix& ref, int len) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& t = nodes[i];
    if (t.size() < len) return "node " + std::to_string(i) + " stopped early";
    for (int j = 0; j < len; ++j) {
      if (std::abs(t.alpha[j] - ref.alpha[j]) > 1e-12 * std::max(1.0, std::abs(ref.alpha[j]))) {
        return "node " + std::to_string(i) + " alpha(" + std::to_string(j + 1) + ") differs";
      }
    }
    for (int j = 0; j + 1 < len; ++j) {
      if (std::abs(t.beta[j] - ref.beta[j]) > 1e-12 * std::max(1.0, ref.beta[j])) {
        return "node " + std::to_string(i) + " beta(" + std::to_string(j + 2) + ") differs";
      }
    }
  }
  return "";
}

inline PropertyResult prop_bfs_connected(int cases) {
  return PropertyRunner("graph connectivity (BFS from node 0)", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const auto g = detail::random_graph(rng, detail::uniform_int(rng, 2, 40));
    std::vector<char> seen(static_cast<std::size_t>(g.node_count()), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : g.neighbors(u)) {
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          q.push(v);
        }
      }
    }
    return reached == g.node_count() ? "" : "unreached nodes";
  });
}

inline PropertyResult prop_metropolis(int cases) {
  return PropertyRunner("metropolis weights", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const auto g = detail::random_graph(rng, detail::uniform_int(rng, 2, 30));
    const auto w = topology::metropolis_weights(g);
    const int k = w.size();
    if ((w.w - w.w.transpose()).cwiseAbs().maxCoeff() != 0.0) return "not symmetric";
    for (int i = 0; i < k; ++i) {
      if (std::abs(w.w.row(i).sum() - 1.0) > 1e-12) return detail::fmt("row sum", w.w.row(i).sum());
      for (int j = 0; j < k; ++j) {
        const auto& nb = g.neighbors(i);
        const bool linked = i == j || std::find(nb.begin(), nb.end(), j) != nb.end();
        if (!linked && w.w(i, j) != 0.0) return "weight outside the adjacency pattern";
        if (linked && i != j && w.w(i, j) <= 0.0) return "missing edge weight";
      }
    }
    const auto eig = eigencore::dense_hermitian_eig(w.w, {.want_vectors = false});
    int ones = 0;
    for (double l : eig.values) {
      if (l > 1.0 + 1e-9 || l <= -1.0 + 1e-12) return detail::fmt("eigenvalue outside (-1, 1]", l);
      if (std::abs(l - 1.0) <= 1e-9) ++ones;
    }
    return ones == 1 ? "" : "eigenvalue 1 multiplicity " + std::to_string(ones);
  });
}

inline PropertyResult prop_mass_conservation(int cases) {
  return PropertyRunner("consensus mass conservation", cases).run([](std::uint64_t seed, int index) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 30);
    const auto g = detail::random_graph(rng, k);
    const auto engine = index % 2 == 0 ? consensus::Engine::standard : consensus::Engine::chebyshev;
    const double p = index % 4 < 2 ? 0.0 : 0.3;
    consensus::SimulatedConsensus ac(
        consensus::AcConfig::make(engine, detail::uniform_int(rng, 1, 30), g, p, rng()));
    const CMatrix z0 = complex_gaussian_matrix(rng, k, detail::uniform_int(rng, 1, 5));
    const auto res = ac.run(z0);
    const double drift = (res.z.colwise().sum() - z0.colwise().sum()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, z0.cwiseAbs().colwise().sum().maxCoeff());
    return drift <= 1e-10 * scale ? "" : detail::fmt("column sum drift", drift);
  });
}

inline PropertyResult prop_monotone_contraction(int cases) {
  return PropertyRunner("standard consensus contraction", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 25);
    const auto g = detail::random_graph(rng, k);
    const CMatrix z0 = complex_gaussian_matrix(rng, k, 2);
    const CMatrix mean = consensus::exact_average(z0);
    double prev = (z0 - mean).norm();
    for (int t = 1; t <= 15; ++t) {
      const double now = (consensus::run_consensus(z0, consensus::AcConfig::make(consensus::Engine::standard, t, g)).z -
                          mean)
                             .norm();
      if (now > prev * (1.0 + 1e-12) + 1e-14) return detail::fmt("disagreement grew at t", t);
      prev = now;
    }
    return "";
  });
}

inline PropertyResult prop_chebyshev_bound(int cases) {
  return PropertyRunner("chebyshev damping bound", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 30);
    const auto g = detail::random_graph(rng, k);
    const int t = detail::uniform_int(rng, 1, 25);
    const auto cfg = consensus::AcConfig::make(consensus::Engine::chebyshev, t, g);
    const CMatrix z0 = complex_gaussian_matrix(rng, k, 3);
    const CMatrix mean = consensus::exact_average(z0);
    const double before = (z0 - mean).norm();
    const double after = (consensus::run_consensus(z0, cfg).z - mean).norm();
    if (cfg.cheb->degenerate) return after <= 1e-10 * before ? "" : "degenerate bounds did not average";
    const double tau = consensus::chebyshev_tau(cfg.cheb->b1, t).back();
    return after <= before / tau * (1.0 + 1e-9) + 1e-12 * before ? "" : detail::fmt("bound exceeded by", after * tau / before);
  });
}

inline PropertyResult prop_consensus_determinism(int cases) {
  return PropertyRunner("consensus determinism", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 20);
    const auto g = detail::random_graph(rng, k);
    const auto cfg = consensus::AcConfig::make(consensus::Engine::standard, detail::uniform_int(rng, 1, 20), g, 0.25,
                                               rng());
    const CMatrix z0 = complex_gaussian_matrix(rng, k, 2);
    consensus::SimulatedConsensus a(cfg);
    consensus::SimulatedConsensus b(cfg);
    for (int call = 0; call < 3; ++call) {
      if (a.run(z0).z != b.run(z0).z) return "outputs differ";
    }
    return "";
  });
}

inline PropertyResult prop_interlacing(int cases) {
  return PropertyRunner("lanczos ritz interlacing", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 14);
    const CMatrix r = eigencore::sample_covariance(complex_gaussian_matrix(rng, k, detail::uniform_int(rng, 1, 16)));
    const CVector v1 = complex_gaussian_matrix(rng, k, 1).normalized();
    const auto la = eigencore::lanczos(r, v1, k);
    for (int j = 1; j < la.t.size(); ++j) {
      const auto a = eigencore::tridiagonal_eigenvalues(la.t.leading(j));
      const auto b = eigencore::tridiagonal_eigenvalues(la.t.leading(j + 1));
      for (int i = 0; i < j; ++i) {
        if (a[i] > b[i] + 1e-8 || a[i] < b[i + 1] - 1e-8) return detail::fmt("interlacing broken at j", j);
      }
    }
    return "";
  });
}

inline PropertyResult prop_ritz_containment(int cases) {
  return PropertyRunner("lanczos ritz containment", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 14);
    const CMatrix r = eigencore::sample_covariance(complex_gaussian_matrix(rng, k, detail::uniform_int(rng, 1, 16)));
    const auto oracle = eigencore::dense_hermitian_eig(r, {.want_vectors = false});
    const auto la = eigencore::lanczos(r, complex_gaussian_matrix(rng, k, 1).normalized(), detail::uniform_int(rng, 1, k));
    for (double x : eigencore::tridiagonal_eigenvalues(la.t)) {
      if (x > oracle.values.front() + 1e-8 || x < oracle.values.back() - 1e-8) return detail::fmt("ritz value", x);
    }
    return "";
  });
}

inline PropertyResult prop_power_method_rate(int cases) {
  return PropertyRunner("power method angle decay", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 12);
    std::vector<double> spectrum{1.0};
    for (int i = 1; i < k; ++i) spectrum.push_back(detail::uniform(rng, 0.0, 0.9));
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    const CMatrix r = psd_with_spectrum(rng, spectrum);
    const auto oracle = eigencore::dense_hermitian_eig(r);
    const CVector u1 = oracle.vectors->col(0);
    const CVector v0 = complex_gaussian_matrix(rng, k, 1);
    auto sin_theta = [&](const CVector& v) { return (v - u1 * u1.dot(v)).norm() / v.norm(); };
    const double tan0 = (v0 - u1 * u1.dot(v0)).norm() / std::abs(u1.dot(v0));
    const double ratio = oracle.values[1] / oracle.values[0];
    for (int j = 1; j <= 12; ++j) {
      const auto pm = eigencore::power_method(r, v0, j);
      const double bound = tan0 * std::pow(ratio, j);
      if (sin_theta(pm.v) > bound * (1.0 + 1e-8) + 1e-12) return detail::fmt("angle above bound at j", j);
    }
    return "";
  });
}

inline PropertyResult prop_bisection_oracle(int cases) {
  return PropertyRunner("bisection vs dense oracle", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const auto t = detail::random_tridiagonal(rng, detail::uniform_int(rng, 1, 12));
    const auto ours = eigencore::tridiagonal_eigenvalues(t);
    const auto oracle = eigencore::dense_hermitian_eig(t.dense(), {.want_vectors = false});
    for (std::size_t i = 0; i < ours.size(); ++i) {
      if (std::abs(ours[i] - oracle.values[i]) > 1e-8) return detail::fmt("mismatch", ours[i] - oracle.values[i]);
    }
    return "";
  });
}

inline PropertyResult prop_ideal_equivalence(int cases) {
  return PropertyRunner("ideal consensus equals centralized", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 16);
    const int n = detail::uniform_int(rng, 1, 16);
    const int m = detail::uniform_int(rng, 1, k);
    const auto g = detail::random_graph(rng, k);
    const CMatrix y = complex_gaussian_matrix(rng, k, n);
    const CMatrix r = eigencore::sample_covariance(y);
    const CVector v0 = complex_gaussian_matrix(rng, k, 1);
    consensus::SimulatedConsensus ac(consensus::AcConfig::make(consensus::Engine::ideal, 1, g));
    const auto dpm = dec_eig::dpm_run(y, ac, m, v0);
    const auto pm = eigencore::power_method(r, v0, m);
    for (int i = 0; i < k; ++i) {
      if (rel_diff(dpm.lambda1[i], pm.lambda1) > 1e-12) return detail::fmt("DPM lambda1 gap", dpm.lambda1[i] - pm.lambda1);
    }
    const CVector v1 = dec_eig::default_dla_start(k);
    const auto dla = dec_eig::dla_run(y, ac, m, v1);
    const auto la = eigencore::lanczos(r, v1, m);
    const std::string gap = compare_tridiagonals(dla.t, la.t, lanczos_trusted_length(la.t, r.norm()));
    if (!gap.empty()) return gap;
    return "";
  });
}

inline PropertyResult prop_beta_nonnegative(int cases) {
  return PropertyRunner("DLA beta is non-negative", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 3, 20);
    const auto g = detail::random_graph(rng, k);
    const CMatrix y = complex_gaussian_matrix(rng, k, detail::uniform_int(rng, 1, 12));
    consensus::SimulatedConsensus ac(
        consensus::AcConfig::make(consensus::Engine::standard, detail::uniform_int(rng, 1, 6), g));
    try {
      const auto run = dec_eig::dla_run(y, ac, detail::uniform_int(rng, 1, k), dec_eig::default_dla_start(k));
      for (const auto& t : run.t) {
        for (double b : t.beta) {
          if (!(b >= 0.0)) return detail::fmt("beta", b);
        }
      }
    } catch (const DegenerateRun&) {
      // A breakdown before any beta is produced is a legitimate outcome.
    }
    return "";
  });
}

inline PropertyResult prop_dec_eig_determinism(int cases) {
  return PropertyRunner("decentralized run determinism", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 3, 16);
    const auto g = detail::random_graph(rng, k);
    const CMatrix y = complex_gaussian_matrix(rng, k, 6);
    const auto cfg = consensus::AcConfig::make(consensus::Engine::standard, 8, g, 0.2, rng());
    const int m = detail::uniform_int(rng, 1, k);
    auto once = [&] {
      consensus::SimulatedConsensus ac(cfg);
      const auto dpm = dec_eig::dpm_run(y, ac, m, CVector::Ones(k));
      const auto dla = dec_eig::dla_run(y, ac, m, dec_eig::default_dla_start(k));
      return std::make_pair(dpm.lambda1, dla.eigenvalues);
    };
    return once() == once() ? "" : "outputs differ";
  });
}

inline PropertyResult prop_scale_invariance(int cases) {
  using detection::StatisticKind;
  return PropertyRunner("statistic scale invariance", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    std::vector<double> lam(static_cast<std::size_t>(detail::uniform_int(rng, 1, 40)));
    for (auto& l : lam) l = detail::uniform(rng, 0.01, 10.0);
    eigencore::sort_descending(lam);
    const double c = std::exp(detail::uniform(rng, -5.0, 5.0));
    std::vector<double> scaled;
    for (double l : lam) scaled.push_back(c * l);
    const detection::StatisticOptions opts{.sigma2 = 1.0};
    for (auto kind : {StatisticKind::gt, StatisticKind::st, StatisticKind::jt}) {
      const double a = detection::compute_statistic(kind, lam, opts).value;
      const double b = detection::compute_statistic(kind, scaled, opts).value;
      if (rel_diff(a, b) > 1e-12) return std::string(detection::to_string(kind)) + " not scale invariant";
    }
    const double rt = detection::compute_statistic(StatisticKind::rt, lam, opts).value;
    const double rt_scaled = detection::compute_statistic(StatisticKind::rt, scaled, opts).value;
    return rel_diff(c * rt, rt_scaled) <= 1e-12 ? "" : "RT not linear in scale";
  });
}

inline PropertyResult prop_unanimous_decisions(int cases) {
  return PropertyRunner("ideal statistic consensus is unanimous", cases).run([](std::uint64_t seed, int) -> std::string {
    Rng rng(seed);
    const int k = detail::uniform_int(rng, 2, 30);
    const auto g = detail::random_graph(rng, k);
    std::vector<double> local(static_cast<std::size_t>(k));
    for (auto& v : local) v = detail::uniform(rng, 0.0, 2.0);
    consensus::SimulatedConsensus ac(consensus::AcConfig::make(consensus::Engine::ideal, 1, g));
    const auto shared = detection::statistic_consensus(local, ac);
    const double threshold = detail::uniform(rng, 0.5, 1.5);
    for (double v : shared) {
      if (detection::local_decide(v, threshold) != detection::local_decide(shared.front(), threshold)) {
        return "nodes disagree";
      }
    }
    return "";
  });
}

inline PropertyResult prop_signal_determinism(int cases) {
  return PropertyRunner("signal generation determinism", cases).run([](std::uint64_t seed, int index) -> std::string {
    signal_model::SignalConfig sc;
    sc.k = 4 + index % 20;
    sc.n = 1 + index % 12;
    sc.p = index % 3;
    sc.snr_db.assign(static_cast<std::size_t>(sc.p), 3.0);
    sc.seed = seed;
    if (sc.p == 0) return signal_model::gen_h0(sc) == signal_model::gen_h0(sc) ? "" : "H0 samples differ";
    return signal_model::gen_h1(sc).y == signal_model::gen_h1(sc).y ? "" : "H1 samples differ";
  });
}

inline PropertyResult prop_harness_determinism(int cases) {
  return PropertyRunner("experiment determinism", cases).run([](std::uint64_t seed, int index) -> std::string {
    Rng rng(seed);
    harness::ExperimentConfig c;
    c.experiment = index % 2 == 0 ? harness::Experiment::ac_compare : harness::Experiment::roc;
    c.k = 12;
    c.n = 4;
    c.m = 4;
    c.ac_iterations = {3};
    c.engines = {consensus::Engine::standard};
    c.link_failure_prob = 0.1;
    c.topology_radius = 0.6;
    c.topology_seed = rng();
    c.seed = rng();
    c.trials = 2;
    c.h0_trials = 2;
    c.h1_trials = 2;
    c.roc_m = {3};
    c.alphas = {0.5};
    const auto a = harness::run(c);
    const auto b = harness::run(c);
    const bool same = harness::report_json(a) == harness::report_json(b) &&
                      harness::convergence_csv(a.convergence) == harness::convergence_csv(b.convergence) &&
                      harness::roc_csv(a.roc) == harness::roc_csv(b.roc);
    return same ? "" : "reports differ";
  });
}

inline std::vector<PropertyResult> run_property_suite(int cases) {
  return {prop_bfs_connected(cases),        prop_metropolis(cases),        prop_mass_conservation(cases),
          prop_monotone_contraction(cases), prop_chebyshev_bound(cases),   prop_consensus_determinism(cases),
          prop_interlacing(cases),          prop_ritz_containment(cases),  prop_power_method_rate(cases),
          prop_bisection_oracle(cases),     prop_ideal_equivalence(cases), prop_beta_nonnegative(cases),
          prop_dec_eig_determinism(cases),  prop_scale_invariance(cases),  prop_unanimous_decisions(cases),
          prop_signal_determinism(cases),   prop_harness_determinism(cases)};
}

}  // namespace eigennet::testing
