#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "eigennet/types.hpp"

/// Gaussian sensing model: under H0 every sample is noise, under H1 the K x N
/// samples are Y = H S + noise with a channel H held fixed over the N samples.
namespace eigennet::signal_model {

struct SignalConfig {
  int k = 40;
  int n = 10;
  int p = 0;  // number of sources; 0 means H0
  double sigma2 = 1.0;
  std::vector<double> snr_db;      // one per source
  std::vector<double> source_var;  // one per source; empty means all 1
  std::uint64_t seed = 0;

  void validate() const;
  [[nodiscard]] double source_variance(int i) const;
};

struct ChannelMatrix {
  CMatrix h;  // K x P, column i = channel of source i
};

/// i.i.d. CN(0, sigma2) entries.
CMatrix gen_h0(const SignalConfig& cfg);

struct H1Sample {
  CMatrix y;
  ChannelMatrix channel;
};

/// H has CN(0,1) entries with each column rescaled so that
/// ||h_i||^2 sigma_i^2 / sigma2 equals the configured linear SNR.
H1Sample gen_h1(const SignalConfig& cfg);

double theoretical_snr(const CVector& h, double source_var, double sigma2);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace eigennet::signal_model
