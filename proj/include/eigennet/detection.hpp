#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "eigennet/consensus.hpp"
#include "eigennet/types.hpp"

/// Eigenvalue-based detection statistics, empirical thresholds and ROC curves.
namespace eigennet::detection {

enum class StatisticKind { rt, gt, st, jt };

std::string_view to_string(StatisticKind kind);
/// Accepts "RT", "GT", "ST", "JT" in any case.
StatisticKind statistic_from_string(std::string_view name);

struct Statistic {
  StatisticKind kind = StatisticKind::rt;
  double value = 0.0;
  /// Some input eigenvalue was negative and clamped to 0.
  bool clamped = false;
};

struct StatisticOptions {
  /// Noise variance; required for RT.
  std::optional<double> sigma2;
  /// Exact-trace mode: replaces sum(lambda) by trace(R) in GT and JT.
  std::optional<double> trace;
};

/// RT = l1 / sigma2, GT = l1 / sum l, ST = prod l / (mean l)^L,
/// JT = sum l^2 / (sum l)^2, with L the length of the supplied list.
/// Throws InvalidArgument on an empty list, a missing sigma2 for RT, or an
/// all-zero list for GT/ST/JT.
Statistic compute_statistic(StatisticKind kind, std::span<const double> eigenvalues,
                            const StatisticOptions& options = {});

struct DetectorConfig {
  StatisticKind kind = StatisticKind::rt;
  double alpha = 0.1;
  int calibration_trials = 1000;
  std::optional<double> sigma2;

  void validate() const;
};

/// (1 - alpha) quantile of the H0 values by the nearest-rank-higher rule:
/// the ceil((1 - alpha) n)-th smallest value. Requires n >= 10 / alpha.
double calibrate_threshold(std::span<const double> h0_values, double alpha);

/// Runs cfg.calibration_trials seeded H0 trials through h0_statistic(trial)
/// and calibrates on the result.
double calibrate_threshold(const DetectorConfig& cfg,
                           const std::function<double(int trial)>& h0_statistic);

enum class Hypothesis { h0, h1 };

/// H1 iff value > threshold.
inline Hypothesis local_decide(double value, double threshold) {
  return value > threshold ? Hypothesis::h1 : Hypothesis::h0;
}

/// One scalar consensus round over the per-node statistics.
std::vector<double> statistic_consensus(std::span<const double> values,
                                        consensus::Consensus& ac);

struct RocPoint {
  double threshold = 0.0;
  double pfa = 0.0;
  double pd = 0.0;
};

/// Empirical (pfa, pd) for each threshold in increasing order. Without an
/// explicit grid, the thresholds are the sorted unique H0 values framed by
/// -inf and +inf.
std::vector<RocPoint> roc_curve(std::span<const double> h0_values,
                                std::span<const double> h1_values,
                                std::optional<std::vector<double>> thresholds = std::nullopt);

/// Pd at the threshold calibrated for the target false-alarm rate.
double pd_at_pfa(std::span<const double> h0_values, std::span<const double> h1_values,
                 double pfa);

/// Fraction of values strictly above threshold.
double exceed_fraction(std::span<const double> values, double threshold);

}  // namespace eigennet::detection
