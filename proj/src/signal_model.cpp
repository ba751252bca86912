#include "eigennet/signal_model.hpp"

#include <cmath>
#include <string>

#include "eigennet/rng.hpp"

namespace eigennet::signal_model {

void SignalConfig::validate() const {
  if (k < 1 || n < 1) throw InvalidArgument("signal: K and N must be >= 1");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("signal: sigma2 must be > 0");
  if (p < 0) throw InvalidArgument("signal: P must be >= 0");
  if (static_cast<int>(snr_db.size()) != p) {
    throw InvalidArgument("signal: expected " + std::to_string(p) + " SNR values, got " +
                          std::to_string(snr_db.size()));
  }
  for (double s : snr_db) {
    if (!std::isfinite(s)) throw InvalidArgument("signal: SNR must be finite");
  }
  if (!source_var.empty() && static_cast<int>(source_var.size()) != p) {
    throw InvalidArgument("signal: source_var must have P entries");
  }
  for (double v : source_var) {
    if (!(v > 0.0)) throw InvalidArgument("signal: source variances must be > 0");
  }
}

double SignalConfig::source_variance(int i) const {
  return source_var.empty() ? 1.0 : source_var.at(static_cast<std::size_t>(i));
}

CMatrix gen_h0(const SignalConfig& cfg) {
  cfg.validate();
  Rng rng(substream_seed(cfg.seed, 0));
  return complex_gaussian_matrix(rng, cfg.k, cfg.n, cfg.sigma2);
}

H1Sample gen_h1(const SignalConfig& cfg) {
  cfg.validate();
  if (cfg.p < 1) throw InvalidArgument("gen_h1: P must be >= 1");
  Rng noise_rng(substream_seed(cfg.seed, 0));
  Rng channel_rng(substream_seed(cfg.seed, 1));
  Rng source_rng(substream_seed(cfg.seed, 2));

  H1Sample out;
  CMatrix& h = out.channel.h;
  h = complex_gaussian_matrix(channel_rng, cfg.k, cfg.p, 1.0);
  for (int i = 0; i < cfg.p; ++i) {
    const double target = db_to_linear(cfg.snr_db[i]) * cfg.sigma2 / cfg.source_variance(i);
    double norm2 = h.col(i).squaredNorm();
    while (norm2 == 0.0) {
      h.col(i) = complex_gaussian_matrix(channel_rng, cfg.k, 1, 1.0);
      norm2 = h.col(i).squaredNorm();
    }
    h.col(i) *= std::sqrt(target / norm2);
  }

  CMatrix s(cfg.p, cfg.n);
  for (int i = 0; i < cfg.p; ++i) {
    for (int t = 0; t < cfg.n; ++t) s(i, t) = complex_gaussian(source_rng, cfg.source_variance(i));
  }
  out.y = h * s + complex_gaussian_matrix(noise_rng, cfg.k, cfg.n, cfg.sigma2);
  return out;
}

double theoretical_snr(const CVector& h, double source_var, double sigma2) {
  if (!(sigma2 > 0.0)) throw InvalidArgument("theoretical_snr: sigma2 must be > 0");
  return h.squaredNorm() * source_var / sigma2;
}

}  // namespace eigennet::signal_model
