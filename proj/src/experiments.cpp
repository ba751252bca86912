#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "eigennet/eigencore.hpp"
#include "eigennet/harness.hpp"
#include "eigennet/rng.hpp"
#include "eigennet/signal_model.hpp"

namespace eigennet::harness {

using consensus::AcConfig;
using consensus::Engine;
using consensus::SimulatedConsensus;

topology::Graph build_topology(const ExperimentConfig& cfg) {
  topology::Graph g = cfg.topology_file.empty()
                          ? topology::generate_random_geometric(cfg.k, cfg.topology_radius, cfg.topology_seed)
                          : topology::load_edge_list_file(cfg.topology_file);
  if (g.node_count() != cfg.k) {
    throw InvalidArgument("topology has " + std::to_string(g.node_count()) + " nodes but K = " +
                          std::to_string(cfg.k));
  }
  g.require_connected();
  return g;
}

namespace {

// Sub-stream ids inside one trial seed.
constexpr std::uint64_t kSignalStream = 0;
constexpr std::uint64_t kStartStream = 1;
constexpr std::uint64_t kFailureStream = 2;

struct Trial {
  std::uint64_t seed = 0;
  CMatrix y;
  CVector v0;
  std::vector<double> spectrum;
};

Trial make_trial(const ExperimentConfig& c, std::uint64_t seed, bool h1) {
  Trial t;
  t.seed = seed;
  signal_model::SignalConfig sc;
  sc.k = c.k;
  sc.n = c.n;
  sc.sigma2 = c.sigma2;
  sc.seed = substream_seed(seed, kSignalStream);
  if (h1) {
    sc.p = c.p;
    sc.snr_db = c.snr_db;
    sc.source_var = c.source_var;
    t.y = signal_model::gen_h1(sc).y;
  } else {
    t.y = signal_model::gen_h0(sc);
  }
  Rng rng(substream_seed(seed, kStartStream));
  do {
    t.v0 = complex_gaussian_matrix(rng, c.k, 1);
  } while (t.v0.norm() == 0.0);
  t.spectrum = eigencore::covariance_eigenvalues(t.y);
  return t;
}

// One AcConfig per (engine, I), re-seeded per trial and use.
class EngineBank {
 public:
  EngineBank(const topology::Graph& g, double link_failure_prob) : graph_(g), p_(link_failure_prob) {}

  SimulatedConsensus make(Engine engine, int iterations, std::uint64_t trial_seed, std::uint64_t use) {
    const auto key = std::make_pair(engine, iterations);
    auto it = base_.find(key);
    if (it == base_.end()) it = base_.emplace(key, AcConfig::make(engine, iterations, graph_, p_)).first;
    AcConfig cfg = it->second;
    cfg.seed = substream_seed(substream_seed(trial_seed, kFailureStream),
                              use * 1000003ULL + static_cast<std::uint64_t>(engine) * 1009ULL +
                                  static_cast<std::uint64_t>(iterations));
    return SimulatedConsensus(std::move(cfg));
  }

 private:
  topology::Graph graph_;
  double p_;
  std::map<std::pair<Engine, int>, AcConfig> base_;
};

struct MseKey {
  std::string engine;
  std::string algorithm;
  int i = 0;
  int eig_index = 1;
  auto operator<=>(const MseKey&) const = default;
};

// Sums of squared errors per key and iteration j (index j-1).
class MseTable {
 public:
  void add(const MseKey& key, int m, int j, double sq) {
    auto& v = sums_[key];
    if (v.empty()) {
      v.assign(static_cast<std::size_t>(m), 0.0);
      order_.push_back(key);
    }
    v[static_cast<std::size_t>(j - 1)] += sq;
  }

  void emit(const ExperimentConfig& c, bool all_j, double count, std::vector<ConvergenceRow>& rows) const {
    for (const auto& key : order_) {
      const auto& v = sums_.at(key);
      for (int j = all_j ? 1 : c.m; j <= c.m; ++j) {
        rows.push_back({std::string(to_string(c.experiment)), key.engine, key.algorithm, c.k, c.n, j, key.i,
                        c.trials, key.eig_index, v[static_cast<std::size_t>(j - 1)] / count});
      }
    }
  }

 private:
  std::map<MseKey, std::vector<double>> sums_;
  std::vector<MseKey> order_;
};

double value_or_zero(const std::vector<double>& values, int index) {
  return index < static_cast<int>(values.size()) ? values[static_cast<std::size_t>(index)] : 0.0;
}

dec_eig::DlaOptions dla_options(const ExperimentConfig& c, bool track) {
  dec_eig::DlaOptions o;
  o.spurious_rel_tol = c.spurious_rel_tol;
  o.track_ritz = track;
  return o;
}

void run_convergence(const ExperimentConfig& c, const topology::Graph& g, ExperimentReport& report) {
  EngineBank bank(g, c.link_failure_prob);
  MseTable table;
  const bool ac_compare = c.experiment == Experiment::ac_compare;
  const bool multi = c.experiment == Experiment::multi_eig;
  std::vector<Algorithm> algorithms = c.algorithms;
  if (ac_compare) algorithms = {Algorithm::dpm};
  if (multi) algorithms = {Algorithm::dla};
  std::vector<int> indices = multi ? c.eig_indices : std::vector<int>{1};

  for (int t = 0; t < c.trials; ++t) {
    const auto seed = trial_seed(c.seed, static_cast<std::uint64_t>(t));
    report.trial_seeds.push_back(seed);
    const Trial trial = make_trial(c, seed, true);
    const CVector v1 = dec_eig::default_dla_start(c.k);

    for (Algorithm alg : algorithms) {
      for (Engine engine : c.engines) {
        const bool ideal = engine == Engine::ideal;
        const std::vector<int> is = ideal ? std::vector<int>{0} : c.ac_iterations;
        for (int iters : is) {
          auto ac = bank.make(engine, iters, seed, 0);
          const std::string eng(consensus::to_string(engine));
          const std::string alg_name(to_string(alg));
          try {
            if (alg == Algorithm::dpm) {
              const double l1 = trial.spectrum[0];
              if (ac_compare) {
                const auto run = dec_eig::dpm_run(trial.y, ac, c.m, trial.v0);
                double sq = 0.0;
                for (double l : run.lambda1) sq += (l - l1) * (l - l1);
                table.add({eng, alg_name, iters, 1}, c.m, c.m, sq);
              } else {
                auto probe = bank.make(engine, iters, seed, 1);
                dec_eig::DpmOptions opts;
                opts.probe = &probe;
                const auto run = dec_eig::dpm_run(trial.y, ac, c.m, trial.v0, opts);
                for (int j = 1; j <= c.m; ++j) {
                  double sq = 0.0;
                  for (double l : run.estimates_by_iteration[j - 1]) {
                    const double e = std::isfinite(l) ? l - l1 : l1;
                    sq += e * e;
                  }
                  table.add({eng, alg_name, iters, 1}, c.m, j, sq);
                }
              }
            } else {
              const auto run = dec_eig::dla_run(trial.y, ac, c.m, v1, dla_options(c, true));
              for (int idx : indices) {
                const double truth = trial.spectrum[static_cast<std::size_t>(idx - 1)];
                for (int j = 1; j <= c.m; ++j) {
                  double sq = 0.0;
                  for (const auto& ritz : run.ritz_by_iteration[j - 1]) {
                    const double e = value_or_zero(ritz, idx - 1) - truth;
                    sq += e * e;
                  }
                  table.add({eng, alg_name, iters, idx}, c.m, j, sq);
                }
              }
            }
          } catch (const DegenerateRun&) {
            // Counted as a missing estimate (lambda-hat = 0) at every node.
            ++report.degenerate_runs;
            for (int idx : indices) {
              const double truth = trial.spectrum[static_cast<std::size_t>(idx - 1)];
              for (int j = ac_compare ? c.m : 1; j <= c.m; ++j) {
                table.add({eng, alg_name, iters, idx}, c.m, j, c.k * truth * truth);
              }
            }
          }
        }
      }
    }
  }
  table.emit(c, !ac_compare, static_cast<double>(c.trials) * c.k, report.convergence);
}

struct Curve {
  std::string detector;
  std::string pipeline;
  std::vector<double> h0;
  std::vector<double> h1;
};

std::vector<double> thinned_grid(std::vector<double> h0, int points) {
  std::sort(h0.begin(), h0.end());
  std::vector<double> grid;
  if (points == 0 || static_cast<std::size_t>(points) >= h0.size()) {
    grid = h0;
  } else {
    for (int i = 0; i < points; ++i) {
      const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(i) * (h0.size() - 1) / (points - 1)));
      grid.push_back(h0[idx]);
    }
  }
  grid.push_back(-std::numeric_limits<double>::infinity());
  grid.push_back(std::numeric_limits<double>::infinity());
  return grid;
}

void run_roc(const ExperimentConfig& c, const topology::Graph& g, ExperimentReport& report) {
  using detection::StatisticKind;
  EngineBank bank(g, c.link_failure_prob);
  const Engine engine = c.engines.front();
  const int iters = c.ac_iterations.front();
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<Curve> curves;
  auto curve = [&](StatisticKind kind, const std::string& pipeline) -> Curve& {
    const auto key = std::make_pair(std::string(detection::to_string(kind)), pipeline);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, curves.size()).first;
      curves.push_back({key.first, key.second, {}, {}});
    }
    return curves[it->second];
  };
  // Register curves up front so the output order follows the config.
  for (Pipeline p : c.pipelines) {
    const std::vector<int> ms = p == Pipeline::exact ? std::vector<int>{0} : c.roc_m;
    for (int m : ms) {
      for (StatisticKind kind : c.detectors) {
        if (p == Pipeline::dpm && kind != StatisticKind::rt) continue;
        const std::string name = p == Pipeline::exact ? "exact" : std::string(to_string(p)) + "-M" + std::to_string(m);
        curve(kind, name);
        if (p == Pipeline::dla && c.exact_trace && (kind == StatisticKind::gt || kind == StatisticKind::jt)) {
          curve(kind, name + "-trace");
        }
      }
    }
  }

  detection::StatisticOptions base;
  base.sigma2 = c.sigma2;
  auto stat = [&](StatisticKind kind, const std::vector<double>& lam, std::optional<double> trace = std::nullopt) {
    detection::StatisticOptions o = base;
    o.trace = trace;
    try {
      return detection::compute_statistic(kind, lam.empty() ? std::vector<double>{0.0} : lam, o).value;
    } catch (const InvalidArgument&) {
      return 0.0;  // all-zero estimate list
    }
  };
  auto smooth = [&](std::vector<double> values, std::uint64_t seed, std::uint64_t use) {
    if (!c.statistic_consensus) return values;
    auto ac = bank.make(engine, iters, seed, use);
    return detection::statistic_consensus(values, ac);
  };

  const int total = c.h0_trials + c.h1_trials;
  for (int t = 0; t < total; ++t) {
    const bool h1 = t >= c.h0_trials;
    const auto seed = trial_seed(c.seed, static_cast<std::uint64_t>(t));
    report.trial_seeds.push_back(seed);
    const Trial trial = make_trial(c, seed, h1);
    auto push = [&](StatisticKind kind, const std::string& name, const std::vector<double>& values) {
      auto& cv = curve(kind, name);
      auto& dst = h1 ? cv.h1 : cv.h0;
      dst.insert(dst.end(), values.begin(), values.end());
    };
    std::uint64_t use = 0;
    for (Pipeline p : c.pipelines) {
      if (p == Pipeline::exact) {
        for (StatisticKind kind : c.detectors) push(kind, "exact", {stat(kind, trial.spectrum)});
        continue;
      }
      for (int m : c.roc_m) {
        const std::string name = std::string(to_string(p)) + "-M" + std::to_string(m);
        auto ac = bank.make(engine, iters, seed, ++use);
        std::vector<std::vector<double>> per_node(static_cast<std::size_t>(c.k));
        std::optional<std::vector<double>> traces;
        try {
          if (p == Pipeline::dpm) {
            const auto run = dec_eig::dpm_run(trial.y, ac, m, trial.v0);
            for (int k = 0; k < c.k; ++k) per_node[k] = {run.lambda1[k]};
          } else {
            const auto run = dec_eig::dla_run(trial.y, ac, m, dec_eig::default_dla_start(c.k), dla_options(c, false));
            for (int k = 0; k < c.k; ++k) per_node[k] = run.eigenvalues[k];
          }
        } catch (const DegenerateRun&) {
          ++report.degenerate_runs;
          for (auto& v : per_node) v = {0.0};
        }
        if (p == Pipeline::dla && c.exact_trace) {
          CMatrix s0(c.k, 1);
          for (int k = 0; k < c.k; ++k) s0(k, 0) = trial.y.row(k).squaredNorm();
          const auto res = ac.run(s0);
          traces.emplace();
          for (int k = 0; k < c.k; ++k) {
            traces->push_back(static_cast<double>(c.k) / c.n * res.z(k, 0).real());
          }
        }
        for (StatisticKind kind : c.detectors) {
          if (p == Pipeline::dpm && kind != StatisticKind::rt) continue;
          std::vector<double> values;
          for (int k = 0; k < c.k; ++k) values.push_back(stat(kind, per_node[k]));
          push(kind, name, smooth(values, seed, ++use));
          if (traces && (kind == StatisticKind::gt || kind == StatisticKind::jt)) {
            std::vector<double> tv;
            for (int k = 0; k < c.k; ++k) tv.push_back(stat(kind, per_node[k], (*traces)[k]));
            push(kind, name + "-trace", smooth(tv, seed, ++use));
          }
        }
      }
    }
  }

  for (const auto& cv : curves) {
    const auto roc = detection::roc_curve(cv.h0, cv.h1, thinned_grid(cv.h0, c.roc_grid_points));
    for (const auto& pt : roc) report.roc.push_back({cv.detector, cv.pipeline, pt.threshold, pt.pfa, pt.pd});
    for (double alpha : c.alphas) {
      if (static_cast<double>(cv.h0.size()) * alpha < 10.0) continue;
      report.pd_at_alpha.push_back({cv.detector, cv.pipeline, alpha, detection::pd_at_pfa(cv.h0, cv.h1, alpha)});
    }
  }
}

void run_audit(const ExperimentConfig& c, const topology::Graph& g, ExperimentReport& report) {
  EngineBank bank(g, c.link_failure_prob);
  const auto seed = trial_seed(c.seed, 0);
  report.trial_seeds.push_back(seed);
  const Trial trial = make_trial(c, seed, c.p > 0);
  const int iters = c.ac_iterations.front();
  for (Algorithm alg : c.algorithms) {
    auto ac = bank.make(c.engines.front(), iters, seed, 0);
    dec_eig::MessageAudit actual;
    dec_eig::MessageAudit expected;
    if (alg == Algorithm::dpm) {
      actual = dec_eig::dpm_run(trial.y, ac, c.m, trial.v0).audit;
      expected = dec_eig::expected_dpm_audit(g, c.m, c.n, iters);
    } else {
      actual = dec_eig::dla_run(trial.y, ac, c.m, dec_eig::default_dla_start(c.k)).audit;
      expected = dec_eig::expected_dla_audit(g, c.m, c.n, iters);
    }
    for (int k = 0; k < c.k; ++k) {
      report.audit.push_back({std::string(to_string(alg)), k, g.degree(k), actual.ac_n_calls, actual.ac_1_calls,
                              actual.units_per_node[k], actual.time_periods});
    }
    const auto check = dec_eig::audit_messages(actual, expected);
    if (!check.ok) {
      report.ok = false;
      report.failures.push_back(std::string(to_string(alg)) + " audit: " + check.mismatch);
    }
  }
}

void run_props(const ExperimentConfig& c, ExperimentReport& report) {
  const int m = std::min(c.m, c.k);
  for (int t = 0; t < c.trials; ++t) {
    const auto seed = trial_seed(c.seed, static_cast<std::uint64_t>(t));
    report.trial_seeds.push_back(seed);
    auto add = [&](std::string check, double value, double tol, bool passed) {
      report.props.push_back({std::move(check), t, value, tol, passed});
      if (!passed) {
        report.ok = false;
        report.failures.push_back(report.props.back().check + " failed at trial " + std::to_string(t));
      }
    };
    const double r1 = props::dpm_vector_residual(substream_seed(seed, 10), c.k, c.n, m, 1e-2);
    add("dpm_vector_error", r1, 1e-10, r1 <= 1e-10);
    const double r2 = props::lambda1_residual(substream_seed(seed, 11), c.k, c.n, m, 1e-2);
    add("lambda1_error", r2, 1e-10, r2 <= 1e-10);
    const int mw = std::min({m, c.k, c.n});
    const double r3 = props::dla_w_exact_terms_residual(substream_seed(seed, 12), c.k, c.n, mw, 1e-3);
    add("dla_w_exact_terms", r3, 1e-10, r3 <= 1e-10);
    const double r4 = props::dla_w_residual_ratio(substream_seed(seed, 13), c.k, c.n, std::min(3, mw), 1e-4);
    add("dla_w_second_order_ratio", r4, 0.25, std::abs(r4 / 4.0 - 1.0) <= 0.25);

    using props::InjectedErrors;
    const auto dec = props::convergence_run(substream_seed(seed, 14), c.convergence_k, c.n, c.convergence_m,
                                            InjectedErrors::decaying);
    add("convergence_decaying_sin_theta", dec.trace.sin_theta.back(), 1e-3, dec.trace.sin_theta.back() <= 1e-3);
    const auto rel = props::convergence_run(substream_seed(seed, 15), c.convergence_k, c.n, c.convergence_m,
                                            InjectedErrors::constant_relative);
    double plateau = 1.0;
    for (std::size_t j = rel.trace.sin_theta.size() / 2; j < rel.trace.sin_theta.size(); ++j) {
      plateau = std::min(plateau, rel.trace.sin_theta[j]);
    }
    add("convergence_relative_constant_plateau", plateau, 1e-2, plateau > 1e-2);
    const auto abs_run = props::convergence_run(substream_seed(seed, 16), c.convergence_k, c.n, c.convergence_m,
                                                InjectedErrors::constant_absolute);
    // Reported only: absolute constant errors shrink relative to the growing iterate.
    report.props.push_back({"convergence_absolute_constant_sin_theta", t, abs_run.trace.sin_theta.back(),
                            std::numeric_limits<double>::quiet_NaN(), true});
  }
}

}  // namespace

ExperimentReport run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.config = cfg;
  switch (cfg.experiment) {
    case Experiment::ac_compare:
    case Experiment::eig_converge:
    case Experiment::multi_eig: run_convergence(cfg, build_topology(cfg), report); break;
    case Experiment::roc: run_roc(cfg, build_topology(cfg), report); break;
    case Experiment::audit_messages: run_audit(cfg, build_topology(cfg), report); break;
    case Experiment::prop_check: run_props(cfg, report); break;
  }
  report.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace props {

namespace {

struct Instance {
  topology::Graph graph;
  CMatrix y;
  CVector v0;
};

Instance instance(std::uint64_t seed, int k, int n) {
  Rng rng(seed);
  Instance in;
  in.graph = topology::Graph::complete(k);
  in.y = complex_gaussian_matrix(rng, k, n);
  in.v0 = complex_gaussian_matrix(rng, k, 1);
  return in;
}

// Errors of relative size eps (w.r.t. the RMS of the exact average) on calls
// accepted by `filter`; scalar-call errors are real.
consensus::InjectedConsensus::Injector relative_injector(std::uint64_t seed, double eps,
                                                         std::function<bool(int, const CMatrix&)> filter) {
  return [seed, eps, filter](int call, const CMatrix& z0) -> CMatrix {
    if (!filter(call, z0)) return {};
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(call)));
    CMatrix e = complex_gaussian_matrix(rng, z0.rows(), z0.cols());
    if (z0.cols() == 1) e = e.real().cast<Complex>();
    const CMatrix mean = consensus::exact_average(z0);
    const double rms = mean.norm() / std::sqrt(static_cast<double>(mean.size()));
    return eps * rms * e;
  };
}

}  // namespace

double dpm_vector_residual(std::uint64_t seed, int k, int n, int m, double eps) {
  const auto in = instance(seed, k, n);
  consensus::InjectedConsensus ac(in.graph, 1, relative_injector(seed ^ 0x5bd1e995ULL, eps,
                                                                 [m](int call, const CMatrix&) { return call < m; }));
  const auto run = dec_eig::dpm_run(in.y, ac, m, in.v0);
  const CVector pred = dec_eig::predict_dpm_vector_error(run.trace, eigencore::sample_covariance(in.y), in.v0, m);
  const CVector sim = run.v_history.col(m);
  return (pred - sim).norm() / sim.norm();
}

double lambda1_residual(std::uint64_t seed, int k, int n, int m, double eps) {
  const auto in = instance(seed, k, n);
  consensus::InjectedConsensus ac(in.graph, 1, relative_injector(seed ^ 0x5bd1e995ULL, eps,
                                                                 [](int, const CMatrix&) { return true; }));
  const auto run = dec_eig::dpm_run(in.y, ac, m, in.v0);
  const auto pred = dec_eig::predict_lambda1_error(run.trace, in.y, run.v_history.col(m));
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    worst = std::max(worst, std::abs(pred.reconstructed[i] - run.lambda1_complex[i]) / std::abs(run.lambda1_complex[i]));
  }
  return worst;
}

double dla_w_exact_terms_residual(std::uint64_t seed, int k, int n, int m, double eps) {
  const auto in = instance(seed, k, n);
  consensus::InjectedConsensus ac(in.graph, 1, relative_injector(seed ^ 0x5bd1e995ULL, eps,
                                                                 [](int, const CMatrix& z0) { return z0.cols() > 1 || false; }));
  const auto run = dec_eig::dla_run(in.y, ac, m, dec_eig::default_dla_start(k));
  double worst = 0.0;
  for (int j = 1; j <= run.iterations_run; ++j) {
    const auto pred = dec_eig::predict_dla_w_error(run.trace, in.y, run, j);
    worst = std::max(worst, (pred.predicted - run.trace.e_w[j - 1]).cwiseAbs().maxCoeff());
  }
  return worst;
}

double dla_w_residual_ratio(std::uint64_t seed, int k, int n, int j, double eps) {
  const auto in = instance(seed, k, n);
  auto residual = [&](double e) {
    consensus::InjectedConsensus ac(in.graph, 1, relative_injector(seed ^ 0x5bd1e995ULL, e,
                                                                   [](int, const CMatrix&) { return true; }));
    const auto run = dec_eig::dla_run(in.y, ac, j, dec_eig::default_dla_start(k));
    const auto pred = dec_eig::predict_dla_w_error(run.trace, in.y, run, j);
    return (pred.predicted - run.trace.e_w[j - 1]).norm();
  };
  return residual(eps) / residual(eps / 2.0);
}

ConvergenceRun convergence_run(std::uint64_t seed, int k, int n, int m, InjectedErrors mode) {
  Rng rng(seed);
  CMatrix y;
  eigencore::EigenSolution spectrum;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 1000) throw DegenerateRun("convergence_run: no instance with a spectral gap found");
    y = dec_eig::rescale_samples(complex_gaussian_matrix(rng, k, n), 4.0);
    spectrum = eigencore::dense_hermitian_eig(eigencore::sample_covariance(y));
    if (spectrum.values[1] / spectrum.values[0] <= 0.85) break;
  }
  const CVector u1 = spectrum.vectors->col(0);
  CVector v0;
  do {
    v0 = complex_gaussian_matrix(rng, k, 1);
  } while (std::abs(u1.dot(v0)) < 1e-8 * v0.norm());

  const double l1 = spectrum.values[0];
  const double l2 = spectrum.values[1];
  const double rate = l1 / std::max(l2, 1.0);
  // Row k of E is c_k y_k^T, giving d(j)[k] = (K/N) conj(c_k) ||y_k||^2.
  auto injector = [=, phases = std::make_shared<Rng>(substream_seed(seed, 7))](int call, const CMatrix& z0) -> CMatrix {
    if (call >= m) return {};
    const int j = call + 1;
    double magnitude = 0.0;
    switch (mode) {
      case InjectedErrors::decaying: magnitude = std::pow(rate, j) / ((j + 1.0) * (j + 1.0)); break;
      case InjectedErrors::constant_absolute: magnitude = 0.1; break;
      case InjectedErrors::constant_relative: {
        // Recover v(j-1)[k] from the node's input row conj(v[k]) y_k^T.
        double v2 = 0.0;
        for (Eigen::Index i = 0; i < z0.rows(); ++i) {
          const double yn = y.row(i).squaredNorm();
          if (yn > 0.0) v2 += z0.row(i).squaredNorm() / yn;
        }
        magnitude = 0.1 * std::sqrt(v2);
        break;
      }
    }
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::acos(-1.0));
    std::uniform_real_distribution<double> size(0.0, 1.0);
    const auto kk = z0.rows();
    CVector d(kk);
    Eigen::Index peak = 0;
    for (Eigen::Index i = 0; i < kk; ++i) {
      d[i] = std::polar(size(*phases), angle(*phases));
      if (std::abs(d[i]) > std::abs(d[peak])) peak = i;
    }
    d *= magnitude / std::abs(d[peak]);
    CMatrix e(kk, z0.cols());
    for (Eigen::Index i = 0; i < kk; ++i) {
      const double yn = y.row(i).squaredNorm();
      const Complex c = std::conj(d[i]) * static_cast<double>(z0.cols()) / (static_cast<double>(kk) * yn);
      e.row(i) = c * y.row(i);
    }
    return e;
  };
  consensus::InjectedConsensus ac(topology::Graph::complete(k), 1, injector);
  const auto run = dec_eig::dpm_run(y, ac, m, v0);
  ConvergenceRun out;
  out.trace = dec_eig::convergence_trace(run, u1);
  out.verdict = dec_eig::check_dpm_convergence_condition(out.trace, spectrum, m);
  out.lambda1 = l1;
  out.lambda2 = l2;
  return out;
}

}  // namespace props

}  // namespace eigennet::harness
