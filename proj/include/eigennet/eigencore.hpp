#pragma once

#include <optional>
#include <span>
#include <vector>

#include "eigennet/types.hpp"

/// Centralized reference algorithms: sample covariance, power method,
/// Lanczos tridiagonalization, Sturm-sequence bisection and a cyclic Jacobi
/// oracle for dense Hermitian matrices.
namespace eigennet::eigencore {

/// R = (1/N) Y Y^H for a K x N sample matrix Y (row k = node k's samples).
CMatrix sample_covariance(const CMatrix& y);

struct PowerMethodResult {
  /// v_M up to the positive factor exp(log_scale): true v_M = exp(log_scale) * v.
  CVector v;
  double log_scale = 0.0;
  double lambda1 = 0.0;
};

struct PowerMethodOptions {
  /// Renormalize the iterate whenever its norm exceeds this magnitude.
  double overflow_guard = 1e150;
};

/// Unnormalized power iteration v_j = R v_{j-1}, j = 1..M, followed by the
/// Rayleigh quotient of v_M.
PowerMethodResult power_method(const CMatrix& r, const CVector& v0, int iterations,
                               const PowerMethodOptions& options = {});

/// Symmetric tridiagonal matrix; alpha holds the M diagonal entries and beta
/// the M-1 off-diagonal entries beta(2..M).
struct TridiagonalMatrix {
  std::vector<double> alpha;
  std::vector<double> beta;

  [[nodiscard]] int size() const noexcept { return static_cast<int>(alpha.size()); }
  /// Leading principal j x j submatrix.
  [[nodiscard]] TridiagonalMatrix leading(int j) const;
  [[nodiscard]] RMatrix dense() const;
  [[nodiscard]] double inf_norm() const noexcept;
};

struct LanczosResult {
  TridiagonalMatrix t;
  /// beta(j+1) fell below the breakdown guard before M steps completed.
  bool invariant_subspace = false;
};

struct LanczosOptions {
  /// Breakdown guard relative to the Frobenius norm of R.
  double breakdown_rel = 1e-12;
};

/// Plain three-term Lanczos recurrence (no reorthogonalization):
///   alpha(j) = v_j^H R v_j
///   w_j      = R v_j - alpha(j) v_j - beta(j) v_{j-1}
///   beta(j+1)= ||w_j||,  v_{j+1} = w_j / beta(j+1)
LanczosResult lanczos(const CMatrix& r, const CVector& v1, int iterations,
                      const LanczosOptions& options = {});

/// Sturm sequence sign count: number of eigenvalues of t strictly below x.
int sturm_count(const TridiagonalMatrix& t, double x);

/// All eigenvalues of a symmetric tridiagonal matrix by bisection inside the
/// Gershgorin interval, sorted descending. abs_tol <= 0 bisects to full
/// double precision.
std::vector<double> tridiagonal_eigenvalues(const TridiagonalMatrix& t, double abs_tol = 0.0);

struct EigenSolution {
  std::vector<double> values;      // descending
  std::optional<CMatrix> vectors;  // column i pairs with values[i]
};

struct JacobiOptions {
  double rel_tol = 1e-12;
  int max_sweeps = 100;
  bool want_vectors = true;
};

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Throws InvalidArgument for non-square or non-Hermitian input.
EigenSolution dense_hermitian_eig(const CMatrix& r, const JacobiOptions& options = {});
EigenSolution dense_hermitian_eig(const RMatrix& r, const JacobiOptions& options = {});

/// Eigenvalues of (1/N) Y Y^H, descending, computed through the smaller of
/// the two Gram matrices and padded with zeros to length K.
std::vector<double> covariance_eigenvalues(const CMatrix& y);

struct SpuriousFilterOptions {
  double tol = 1e-8;
  /// Cullum-Willoughby comparison against eig(T without first row/column).
  bool cullum_willoughby = false;
};

/// Removes spurious Ritz values (inputs and output descending).
///  - runs of values within tol of each other collapse to the member closest
///    to the previous list;
///  - rank criterion: R has at most min(K, N) nonzero eigenvalues, so for
///    j = current.size() > min(K, N) the surplus nonzero values (|x| > tol)
///    are dropped, farthest from the previous iteration's list first.
std::vector<double> filter_spurious(std::span<const double> current,
                                    std::span<const double> previous, int k, int n,
                                    double tol);

/// Cullum-Willoughby test: a simple (non-repeated) Ritz value that is also an
/// eigenvalue of T with its first row and column deleted is spurious.
std::vector<double> cullum_willoughby_filter(const TridiagonalMatrix& t,
                                             std::span<const double> ritz, double tol);

/// Sorts descending; stable, so ties keep their input order.
void sort_descending(std::vector<double>& values);

}  // namespace eigennet::eigencore
