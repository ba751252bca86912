#include "eigennet/detection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace eigennet::detection {

std::string_view to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::rt: return "RT";
    case StatisticKind::gt: return "GT";
    case StatisticKind::st: return "ST";
    case StatisticKind::jt: return "JT";
  }
  return "unknown";
}

StatisticKind statistic_from_string(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "RT") return StatisticKind::rt;
  if (up == "GT") return StatisticKind::gt;
  if (up == "ST") return StatisticKind::st;
  if (up == "JT") return StatisticKind::jt;
  throw InvalidArgument("unknown statistic: " + std::string(name));
}

Statistic compute_statistic(StatisticKind kind, std::span<const double> eigenvalues,
                            const StatisticOptions& options) {
  if (eigenvalues.empty()) throw InvalidArgument("compute_statistic: empty eigenvalue list");
  Statistic out;
  out.kind = kind;
  std::vector<double> lam(eigenvalues.begin(), eigenvalues.end());
  for (double& x : lam) {
    if (!std::isfinite(x)) throw InvalidArgument("compute_statistic: non-finite eigenvalue");
    if (x < 0.0) {
      x = 0.0;
      out.clamped = true;
    }
  }
  const double top = *std::max_element(lam.begin(), lam.end());
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : lam) {
    sum += x;
    sum_sq += x * x;
  }

  if (kind == StatisticKind::rt) {
    if (!options.sigma2 || !(*options.sigma2 > 0.0)) {
      throw InvalidArgument("compute_statistic: RT requires sigma2 > 0");
    }
    out.value = top / *options.sigma2;
    return out;
  }
  if (sum == 0.0) throw InvalidArgument("compute_statistic: all eigenvalues are zero");

  switch (kind) {
    case StatisticKind::gt: {
      const double denom = options.trace ? *options.trace : sum;
      if (!(denom > 0.0)) throw InvalidArgument("compute_statistic: trace must be > 0");
      out.value = top / denom;
      break;
    }
    case StatisticKind::st: {
      const double l = static_cast<double>(lam.size());
      const double mean = sum / l;
      double log_value = 0.0;
      bool zero = false;
      for (double x : lam) {
        if (x == 0.0) {
          zero = true;
          break;
        }
        log_value += std::log(x / mean);
      }
      out.value = zero ? 0.0 : std::exp(log_value);
      break;
    }
    case StatisticKind::jt: {
      const double denom = options.trace ? *options.trace : sum;
      if (!(denom > 0.0)) throw InvalidArgument("compute_statistic: trace must be > 0");
      out.value = sum_sq / (denom * denom);
      break;
    }
    case StatisticKind::rt: break;
  }
  return out;
}

void DetectorConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("detector: alpha must lie in (0, 1)");
  if (calibration_trials < 1000) throw InvalidArgument("detector: calibration_trials must be >= 1000");
  if (kind == StatisticKind::rt && (!sigma2 || !(*sigma2 > 0.0))) {
    throw InvalidArgument("detector: RT requires sigma2 > 0");
  }
}

double calibrate_threshold(std::span<const double> h0_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("calibrate_threshold: alpha must lie in (0, 1)");
  const auto n = h0_values.size();
  const double needed = std::ceil(10.0 / alpha - 1e-9);
  if (static_cast<double>(n) < needed) {
    throw InvalidArgument("calibrate_threshold: alpha = " + std::to_string(alpha) + " needs at least " +
                          std::to_string(static_cast<long long>(needed)) + " H0 trials, got " +
                          std::to_string(n));
  }
  std::vector<double> sorted(h0_values.begin(), h0_values.end());
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

double calibrate_threshold(const DetectorConfig& cfg,
                           const std::function<double(int trial)>& h0_statistic) {
  cfg.validate();
  std::vector<double> values(static_cast<std::size_t>(cfg.calibration_trials));
  for (int t = 0; t < cfg.calibration_trials; ++t) values[t] = h0_statistic(t);
  return calibrate_threshold(values, cfg.alpha);
}

std::vector<double> statistic_consensus(std::span<const double> values, consensus::Consensus& ac) {
  if (static_cast<int>(values.size()) != ac.node_count()) {
    throw InvalidArgument("statistic_consensus: one value per node expected");
  }
  CMatrix z0(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t k = 0; k < values.size(); ++k) z0(static_cast<Eigen::Index>(k), 0) = values[k];
  const auto result = ac.run(z0);
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out[k] = result.z(static_cast<Eigen::Index>(k), 0).real();
  return out;
}

double exceed_fraction(std::span<const double> values, double threshold) {
  if (values.empty()) return 0.0;
  const auto hits = std::count_if(values.begin(), values.end(), [&](double v) { return v > threshold; });
  return static_cast<double>(hits) / static_cast<double>(values.size());
}

std::vector<RocPoint> roc_curve(std::span<const double> h0_values, std::span<const double> h1_values,
                                std::optional<std::vector<double>> thresholds) {
  std::vector<double> grid;
  if (thresholds) {
    grid = std::move(*thresholds);
  } else {
    grid.assign(h0_values.begin(), h0_values.end());
    grid.push_back(-std::numeric_limits<double>::infinity());
    grid.push_back(std::numeric_limits<double>::infinity());
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> h0(h0_values.begin(), h0_values.end());
  std::vector<double> h1(h1_values.begin(), h1_values.end());
  std::sort(h0.begin(), h0.end());
  std::sort(h1.begin(), h1.end());
  auto above = [](const std::vector<double>& sorted, double th) {
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), th);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
  };

  std::vector<RocPoint> out;
  out.reserve(grid.size());
  for (double th : grid) {
    // -inf counts every value as exceeding, including a literal -inf.
    const bool lowest = th == -std::numeric_limits<double>::infinity();
    out.push_back({th, lowest ? 1.0 : above(h0, th), lowest ? 1.0 : above(h1, th)});
  }
  return out;
}

double pd_at_pfa(std::span<const double> h0_values, std::span<const double> h1_values, double pfa) {
  return exceed_fraction(h1_values, calibrate_threshold(h0_values, pfa));
}

}  // namespace eigennet::detection
