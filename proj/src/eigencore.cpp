#include "eigennet/eigencore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eigennet::eigencore {

CMatrix sample_covariance(const CMatrix& y) {
  if (y.rows() < 1 || y.cols() < 1) {
    throw InvalidArgument("sample_covariance: empty sample matrix");
  }
  if (!y.allFinite()) {
    throw InvalidArgument("sample_covariance: non-finite samples");
  }
  CMatrix r = (y * y.adjoint()) / static_cast<double>(y.cols());
  // Exact Hermitian symmetry; the diagonal is real by construction.
  CMatrix h = 0.5 * (r + r.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
  return h;
}

PowerMethodResult power_method(const CMatrix& r, const CVector& v0, int iterations,
                               const PowerMethodOptions& options) {
  if (r.rows() != r.cols() || v0.size() != r.rows()) {
    throw InvalidArgument("power_method: dimension mismatch");
  }
  if (iterations < 1) throw InvalidArgument("power_method: iterations must be >= 1");
  if (v0.norm() == 0.0) throw InvalidArgument("power_method: zero starting vector");

  PowerMethodResult out;
  out.v = v0;
  for (int j = 0; j < iterations; ++j) {
    out.v = r * out.v;
    const double nrm = out.v.stableNorm();
    if (nrm > options.overflow_guard) {
      out.log_scale += std::log(nrm);
      out.v *= 1.0 / nrm;
    }
  }
  const double nrm = out.v.stableNorm();
  if (nrm == 0.0) throw DegenerateRun("power_method: iterate collapsed to zero");
  const CVector u = out.v * (1.0 / nrm);
  out.lambda1 = u.dot(r * u).real();
  return out;
}

TridiagonalMatrix TridiagonalMatrix::leading(int j) const {
  if (j < 0 || j > size()) throw InvalidArgument("TridiagonalMatrix::leading: bad size");
  TridiagonalMatrix t;
  t.alpha.assign(alpha.begin(), alpha.begin() + j);
  t.beta.assign(beta.begin(), beta.begin() + std::max(0, j - 1));
  return t;
}

RMatrix TridiagonalMatrix::dense() const {
  const int m = size();
  RMatrix d = RMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) d(i, i) = alpha[i];
  for (int i = 0; i + 1 < m; ++i) {
    d(i, i + 1) = beta[i];
    d(i + 1, i) = beta[i];
  }
  return d;
}

double TridiagonalMatrix::inf_norm() const noexcept {
  double best = 0.0;
  const int m = size();
  for (int i = 0; i < m; ++i) {
    double row = std::abs(alpha[i]);
    if (i > 0) row += std::abs(beta[i - 1]);
    if (i + 1 < m) row += std::abs(beta[i]);
    best = std::max(best, row);
  }
  return best;
}

LanczosResult lanczos(const CMatrix& r, const CVector& v1, int iterations,
                      const LanczosOptions& options) {
  const auto k = r.rows();
  if (r.cols() != k || v1.size() != k) throw InvalidArgument("lanczos: dimension mismatch");
  if (iterations < 1 || iterations > k) {
    throw InvalidArgument("lanczos: iterations must satisfy 1 <= M <= K");
  }
  if (std::abs(v1.norm() - 1.0) > 1e-10) {
    throw InvalidArgument("lanczos: starting vector must have unit norm");
  }

  const double guard = options.breakdown_rel * r.norm();
  LanczosResult out;
  CVector v_prev = CVector::Zero(k);
  CVector v = v1;
  double beta = 0.0;
  for (int j = 1; j <= iterations; ++j) {
    const CVector rv = r * v;
    const double alpha = v.dot(rv).real();
    out.t.alpha.push_back(alpha);
    CVector w = rv - alpha * v - beta * v_prev;
    const double beta_next = w.norm();
    if (j == iterations) break;
    if (beta_next <= guard) {
      out.invariant_subspace = true;
      break;
    }
    out.t.beta.push_back(beta_next);
    v_prev = std::move(v);
    v = w / beta_next;
    beta = beta_next;
  }
  return out;
}

int sturm_count(const TridiagonalMatrix& t, double x) {
  constexpr double kPivotFloor = 1e-300;
  const int m = t.size();
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      q = t.alpha[0] - x;
    } else {
      if (std::abs(q) < kPivotFloor) q = std::copysign(kPivotFloor, q);
      q = t.alpha[i] - x - t.beta[i - 1] * t.beta[i - 1] / q;
    }
    if (q < 0.0) ++count;
  }
  return count;
}

std::vector<double> tridiagonal_eigenvalues(const TridiagonalMatrix& t, double abs_tol) {
  const int m = t.size();
  if (static_cast<int>(t.beta.size()) != std::max(0, m - 1)) {
    throw InvalidArgument("tridiagonal_eigenvalues: inconsistent alpha/beta lengths");
  }
  std::vector<double> values;
  if (m == 0) return values;
  values.reserve(m);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < m; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(t.beta[i - 1]);
    if (i + 1 < m) radius += std::abs(t.beta[i]);
    lo = std::min(lo, t.alpha[i] - radius);
    hi = std::max(hi, t.alpha[i] + radius);
  }
  const double pad = 1e-14 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  lo -= pad;
  hi += pad;

  // Eigenvalue index i (ascending) is the point where the count of
  // eigenvalues below x crosses from i to i + 1.
  for (int i = m - 1; i >= 0; --i) {
    double a = lo;
    double b = hi;
    while (true) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (abs_tol > 0.0 && b - a <= abs_tol) break;
      if (sturm_count(t, mid) <= i) {
        a = mid;
      } else {
        b = mid;
      }
    }
    values.push_back(0.5 * (a + b));
  }
  return values;
}

namespace {

void check_hermitian(const CMatrix& r) {
  if (r.rows() != r.cols()) throw InvalidArgument("dense_hermitian_eig: matrix not square");
  const double scale = r.norm();
  if ((r - r.adjoint()).norm() > 1e-12 * scale + 1e-300) {
    throw InvalidArgument("dense_hermitian_eig: matrix is not Hermitian");
  }
}

double off_diagonal_norm(const CMatrix& a) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      if (r != c) s += std::norm(a(r, c));
    }
  }
  return std::sqrt(s);
}

}  // namespace

EigenSolution dense_hermitian_eig(const CMatrix& r, const JacobiOptions& options) {
  check_hermitian(r);
  const auto n = r.rows();
  CMatrix a = 0.5 * (r + r.adjoint());
  CMatrix v = options.want_vectors ? CMatrix::Identity(n, n) : CMatrix();
  const double target = options.rel_tol * r.norm();

  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Complex h = a(p, q);
        const double mag = std::abs(h);
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Phase-rotate the pair into a real 2x2 problem, then apply the
        // classical Jacobi rotation with |t| <= 1.
        const Complex phase = std::conj(h) / mag;  // e^{-i arg h}
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex g_pp = c;
        const Complex g_pq = s;
        const Complex g_qp = -s * phase;
        const Complex g_qq = c * phase;

        for (Eigen::Index row = 0; row < n; ++row) {
          const Complex xp = a(row, p);
          const Complex xq = a(row, q);
          a(row, p) = xp * g_pp + xq * g_qp;
          a(row, q) = xp * g_pq + xq * g_qq;
        }
        for (Eigen::Index col = 0; col < n; ++col) {
          const Complex yp = a(p, col);
          const Complex yq = a(q, col);
          a(p, col) = std::conj(g_pp) * yp + std::conj(g_qp) * yq;
          a(q, col) = std::conj(g_pq) * yp + std::conj(g_qq) * yq;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();

        if (options.want_vectors) {
          for (Eigen::Index row = 0; row < n; ++row) {
            const Complex xp = v(row, p);
            const Complex xq = v(row, q);
            v(row, p) = xp * g_pp + xq * g_qp;
            v(row, q) = xp * g_pq + xq * g_qq;
          }
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i).real() > a(j, j).real();
  });

  EigenSolution out;
  out.values.reserve(static_cast<std::size_t>(n));
  for (auto i : order) out.values.push_back(a(i, i).real());
  if (options.want_vectors) {
    CMatrix sorted(n, n);
    for (Eigen::Index c = 0; c < n; ++c) sorted.col(c) = v.col(order[static_cast<std::size_t>(c)]);
    out.vectors = std::move(sorted);
  }
  return out;
}

EigenSolution dense_hermitian_eig(const RMatrix& r, const JacobiOptions& options) {
  return dense_hermitian_eig(CMatrix(r.cast<Complex>()), options);
}

std::vector<double> covariance_eigenvalues(const CMatrix& y) {
  const auto k = y.rows();
  const auto n = y.cols();
  JacobiOptions opts;
  opts.want_vectors = false;
  if (n >= k) return dense_hermitian_eig(sample_covariance(y), opts).values;

  CMatrix gram = (y.adjoint() * y) / static_cast<double>(n);
  gram = 0.5 * (gram + gram.adjoint());
  auto values = dense_hermitian_eig(gram, opts).values;
  values.resize(static_cast<std::size_t>(k), 0.0);
  return values;
}

void sort_descending(std::vector<double>& values) {
  std::stable_sort(values.begin(), values.end(), std::greater<>());
}

std::vector<double> filter_spurious(std::span<const double> current,
                                    std::span<const double> previous, int k, int n,
                                    double tol) {
  const auto j = static_cast<int>(current.size());

  auto distance = [&](double value) {
    double best = std::numeric_limits<double>::infinity();
    for (double p : previous) best = std::min(best, std::abs(p - value));
    return best;
  };

  // Runs of values within tol of their neighbour collapse to one member: the
  // one closest to the previous list (the first when there is none).
  std::vector<double> kept;
  kept.reserve(current.size());
  for (std::size_t i = 0; i < current.size();) {
    std::size_t end = i + 1;
    while (end < current.size() && std::abs(current[end - 1] - current[end]) <= tol) ++end;
    double pick = current[i];
    for (std::size_t q = i + 1; q < end; ++q) {
      if (distance(current[q]) < distance(pick)) pick = current[q];
    }
    kept.push_back(pick);
    i = end;
  }

  // R has at most min(K, N) nonzero eigenvalues. Past that many iterations,
  // surplus nonzero values are the ones new relative to the previous list:
  // drop those farthest from it.
  const int allowed = std::min(k, n);
  if (j <= allowed) return kept;
  auto nonzero = [&] {
    return static_cast<int>(
        std::count_if(kept.begin(), kept.end(), [&](double x) { return std::abs(x) > tol; }));
  };
  while (nonzero() > allowed) {
    auto worst = kept.end();
    double worst_dist = -1.0;
    for (auto it = kept.begin(); it != kept.end(); ++it) {
      if (std::abs(*it) <= tol) continue;
      const double d = distance(*it);
      if (d > worst_dist) {
        worst_dist = d;
        worst = it;
      }
    }
    kept.erase(worst);
  }
  return kept;
}

std::vector<double> cullum_willoughby_filter(const TridiagonalMatrix& t,
                                             std::span<const double> ritz, double tol) {
  if (t.size() < 2) return {ritz.begin(), ritz.end()};
  TridiagonalMatrix reduced;
  reduced.alpha.assign(t.alpha.begin() + 1, t.alpha.end());
  reduced.beta.assign(t.beta.begin() + 1, t.beta.end());
  const auto reduced_values = tridiagonal_eigenvalues(reduced);

  std::vector<double> kept;
  for (std::size_t i = 0; i < ritz.size(); ++i) {
    const double value = ritz[i];
    const bool repeated =
        (i > 0 && std::abs(ritz[i - 1] - value) <= tol) ||
        (i + 1 < ritz.size() && std::abs(ritz[i + 1] - value) <= tol);
    const bool in_reduced = std::any_of(reduced_values.begin(), reduced_values.end(),
                                        [&](double x) { return std::abs(x - value) <= tol; });
    if (!repeated && in_reduced) continue;
    kept.push_back(value);
  }
  return kept;
}

}  // namespace eigennet::eigencore
