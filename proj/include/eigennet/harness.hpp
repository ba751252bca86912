#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "eigennet/consensus.hpp"
#include "eigennet/dec_eig.hpp"
#include "eigennet/detection.hpp"
#include "eigennet/topology.hpp"
#include "eigennet/types.hpp"

/// Configuration, Monte-Carlo orchestration and result files.
namespace eigennet::harness {

enum class Experiment { ac_compare, eig_converge, multi_eig, roc, audit_messages, prop_check };
enum class Algorithm { dpm, dla };
enum class Pipeline { exact, dpm, dla };

std::string_view to_string(Experiment e);
std::string_view to_string(Algorithm a);
std::string_view to_string(Pipeline p);
Experiment experiment_from_string(std::string_view name);

/// Validation failure; what() joins every issue found, one per line.
class ConfigError : public InvalidArgument {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  [[nodiscard]] const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::eig_converge;
  int k = 40;
  int n = 10;
  int m = 20;
  std::vector<int> ac_iterations;  // key "I"
  int p = 1;
  double sigma2 = 1.0;
  std::vector<double> snr_db{5.0};
  std::vector<double> source_var;
  std::vector<consensus::Engine> engines;
  double link_failure_prob = 0.0;
  int trials = 500;
  std::uint64_t seed = 1;
  double topology_radius = 0.45;
  std::uint64_t topology_seed = 1;
  std::string topology_file;
  std::vector<detection::StatisticKind> detectors{detection::StatisticKind::rt,
                                                  detection::StatisticKind::gt};
  std::vector<Pipeline> pipelines{Pipeline::exact, Pipeline::dpm, Pipeline::dla};
  std::vector<double> alphas{0.05, 0.1, 0.2, 0.5};
  std::vector<int> roc_m;  // defaults to {M}
  int h0_trials = 0;       // 0: use trials
  int h1_trials = 0;
  std::vector<int> eig_indices{1, 3, 5, 9};
  std::vector<Algorithm> algorithms{Algorithm::dpm, Algorithm::dla};
  bool exact_trace = false;
  bool statistic_consensus = false;
  double spurious_rel_tol = 1e-3;
  int roc_grid_points = 200;  // 0: every unique H0 value
  int convergence_k = 8;
  int convergence_m = 60;
  std::string output = "out";

  /// Re-checks value ranges after programmatic edits (e.g. CLI overrides).
  void validate() const;
  /// Canonical key = value lines of the effective configuration.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses the flat "key = value" format ('#' comments, blank lines ignored).
/// Lists are comma-separated. Unknown keys, malformed values and missing
/// required keys are all reported in one ConfigError. When `experiment` is
/// given it stands in for (and must agree with) the file's experiment key.
ExperimentConfig validate_config(std::string_view text,
                                 std::optional<Experiment> experiment = std::nullopt);
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  std::optional<Experiment> experiment = std::nullopt);

struct ConvergenceRow {
  std::string experiment;
  std::string engine;
  std::string algorithm;
  int k = 0;
  int n = 0;
  int m = 0;
  int i = 0;
  int trials = 0;
  int eig_index = 0;
  double mse = 0.0;
};

struct RocRow {
  std::string detector;
  std::string pipeline;
  double threshold = 0.0;
  double pfa = 0.0;
  double pd = 0.0;
};

struct AuditRow {
  std::string algorithm;
  int node = 0;
  int degree = 0;
  int ac_n_calls = 0;
  int ac_1_calls = 0;
  long long units = 0;
  int time_periods = 0;
};

struct PropRow {
  std::string check;
  int trial = 0;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct PdAtAlpha {
  std::string detector;
  std::string pipeline;
  double alpha = 0.0;
  double pd = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ConvergenceRow> convergence;
  std::vector<RocRow> roc;
  std::vector<PdAtAlpha> pd_at_alpha;
  std::vector<AuditRow> audit;
  std::vector<PropRow> props;
  std::vector<std::uint64_t> trial_seeds;
  int degenerate_runs = 0;
  /// False when an audit or property check failed.
  bool ok = true;
  std::vector<std::string> failures;
  double duration_s = 0.0;
};

/// Builds the configured topology (file or random geometric graph).
topology::Graph build_topology(const ExperimentConfig& cfg);

ExperimentReport run(const ExperimentConfig& cfg);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

std::string convergence_csv(const std::vector<ConvergenceRow>& rows);
std::string roc_csv(const std::vector<RocRow>& rows);
std::string audit_csv(const std::vector<AuditRow>& rows);
std::string prop_csv(const std::vector<PropRow>& rows);
/// report.json content; deterministic (no timing).
std::string report_json(const ExperimentReport& report);

/// Writes the experiment's CSV, report.json and timing.json into dir and
/// returns the paths written.
std::vector<std::filesystem::path> emit_csv(const ExperimentReport& report,
                                            const std::filesystem::path& dir);

/// Closed-form error checks on seeded random instances, shared by the
/// prop-check experiment and the test suites.
namespace props {

/// Relative residual between predicted and simulated v(M) under injected
/// errors of relative size eps on every vector AC call.
double dpm_vector_residual(std::uint64_t seed, int k, int n, int m, double eps);

/// Largest relative gap between reconstructed and simulated lambda1[k].
double lambda1_residual(std::uint64_t seed, int k, int n, int m, double eps);

/// With only vector-AC errors, largest gap between predicted and measured
/// w errors over all iterations.
double dla_w_exact_terms_residual(std::uint64_t seed, int k, int n, int m, double eps);

/// Residual of the first-order w prediction at iteration j for errors of size
/// eps divided by the residual at eps / 2 (about 4 for a second-order residual).
double dla_w_residual_ratio(std::uint64_t seed, int k, int n, int j, double eps);

enum class InjectedErrors { decaying, constant_absolute, constant_relative };

struct ConvergenceRun {
  dec_eig::ConvergenceTrace trace;
  dec_eig::ConvergenceVerdict verdict;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// DPM on a K-node instance rescaled to lambda1 = 4 (lambda2 / lambda1 <= 0.85)
/// with injected iteration errors:
///   decaying:          ||d(j)||_inf = (lambda1 / max(lambda2, 1))^j / (j + 1)^2
///   constant_absolute: ||d(j)||_inf = 0.1
///   constant_relative: ||d(j)||_inf = 0.1 ||v(j-1)||
ConvergenceRun convergence_run(std::uint64_t seed, int k, int n, int m, InjectedErrors mode);

}  // namespace props

}  // namespace eigennet::harness
