#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eigennet/consensus.hpp"
#include "eigennet/eigencore.hpp"
#include "eigennet/topology.hpp"
#include "eigennet/types.hpp"

/// Decentralized power method (DPM) and decentralized Lanczos algorithm
/// (DLA). Every node holds only its own sample row and scalars; the only
/// cross-node interaction is a Consensus call.
namespace eigennet::dec_eig {

/// Per-node state. A node never sees another node's samples.
struct NodeState {
  int id = 0;
  CVector y;  // local samples y_k (length N)
  Complex v_cur{0.0, 0.0};
  Complex v_prev{0.0, 0.0};
  Complex w{0.0, 0.0};
  std::vector<double> alpha_hist;
  std::vector<double> beta_hist;  // beta(1..j); beta(1) = 0
  std::vector<double> lambda_est;
  bool terminated = false;        // DLA breakdown reached at this node
  bool clamped = false;           // a negative |w|^2 average was clamped to 0
};

/// Counters behind the communication-cost table.
struct MessageAudit {
  int ac_n_calls = 0;
  int ac_1_calls = 0;
  std::vector<long long> units_per_node;
  int time_periods = 0;

  void record(const consensus::ConsensusResult& result, bool vector_call);
};

struct AuditCheck {
  bool ok = true;
  std::string mismatch;  // first differing counter, empty when ok
};

/// DPM: AC_N = M + 1, AC_1 = 1, units = I (M N + N + 1) d(k), periods = M + 2.
MessageAudit expected_dpm_audit(const topology::Graph& g, int m, int n, int i);
/// DLA: AC_N = M, AC_1 = M, units = I (M N + M) d(k), periods = 2 M.
MessageAudit expected_dla_audit(const topology::Graph& g, int m, int n, int i);
AuditCheck audit_messages(const MessageAudit& actual, const MessageAudit& expected);

// ---------------------------------------------------------------------------
// DPM

/// Realized consensus errors of one DPM run.
struct DpmErrorTrace {
  std::vector<CMatrix> e1;  // e1[j-1]: K x N error of iteration j's vector AC
  CMatrix e2;               // K x N error of the final vector AC
  CVector e3;               // K error of the final scalar AC
  std::vector<CVector> d;   // d[j-1][k] = (K/N) e1(j)[k]^H y_k
  CVector e_num;
  CVector e_den;
};

struct DpmOptions {
  /// When set, after every iteration j the eigenvalue stage is evaluated
  /// through this separate engine (its calls do not enter the audit).
  consensus::Consensus* probe = nullptr;
};

struct DpmResult {
  std::vector<double> lambda1;            // lambda_1 estimate at each node
  std::vector<Complex> lambda1_complex;   // same, before taking the real part
  CMatrix v_history;                      // K x (M+1), column j = v(j)
  std::vector<NodeState> nodes;
  DpmErrorTrace trace;
  MessageAudit audit;
  /// estimates_by_iteration[j-1][k], filled only with DpmOptions::probe.
  std::vector<std::vector<double>> estimates_by_iteration;
};

/// Runs M DPM iterations followed by the eigenvalue stage. v0 holds each
/// node's starting scalar. Throws DegenerateRun on a zero denominator.
DpmResult dpm_run(const CMatrix& y, consensus::Consensus& ac, int iterations,
                  const CVector& v0, const DpmOptions& options = {});

/// R^M v0 + sum_j R^{M-j} d(j).
CVector predict_dpm_vector_error(const DpmErrorTrace& trace, const CMatrix& r,
                                 const CVector& v0, int iterations);

struct Lambda1ErrorPrediction {
  CVector e_num;
  CVector e_den;
  std::vector<Complex> reconstructed;  // (v^H R v + e_num) / (v^H v + e_den)
};

/// Closed-form numerator/denominator errors of the eigenvalue stage.
Lambda1ErrorPrediction predict_lambda1_error(const DpmErrorTrace& trace, const CMatrix& y,
                                             const CVector& v_m);

struct ConvergenceTrace {
  std::vector<double> sin_theta;  // j = 0..M
  std::vector<double> d_inf;      // j = 1..M (index j-1)
};

ConvergenceTrace convergence_trace(const DpmResult& run, const CVector& u1);

struct ConvergenceVerdict {
  bool precondition_ok = false;
  /// ||d(j)||_inf (j+1) (max(lambda2,1)/lambda1)^j is decreasing over the window.
  bool condition_satisfied = false;
  /// Least-squares slope of log(||d(j)||_inf (j+1) (max(lambda2,1)/lambda1)^j)
  /// over the second half of the window; negative means the errors decay
  /// faster than the admissible rate.
  double rate_margin = 0.0;
  std::vector<double> sin_theta;
  std::string message;
};

ConvergenceVerdict check_dpm_convergence_condition(const ConvergenceTrace& trace,
                                                   const eigencore::EigenSolution& spectrum,
                                                   int iterations);

/// Scales Y so that the largest eigenvalue of (1/N) Y Y^H equals target.
CMatrix rescale_samples(const CMatrix& y, double target_lambda1);

// ---------------------------------------------------------------------------
// DLA

struct DlaErrorTrace {
  std::vector<CMatrix> e_i;    // e_i[j-1]: K x N error of iteration j's vector AC
  std::vector<CVector> e_ii;   // e_ii[j-1]: error of iteration j's scalar AC on |w(j)|^2
  std::vector<CVector> e_w;    // e_w[j-1] = w(j) - w_ideal(j), measured
};

struct DlaOptions {
  /// Breakdown when beta(j+1)[k] falls below this times the node's largest |alpha|.
  double breakdown_rel = 1e-12;
  /// Spurious-value tolerance relative to the largest Ritz magnitude.
  double spurious_rel_tol = 1e-3;
  bool cullum_willoughby = false;
  /// Compute filtered Ritz lists after every iteration (not only at M).
  bool track_ritz = false;
};

struct DlaResult {
  std::vector<eigencore::TridiagonalMatrix> t;          // per node
  std::vector<std::vector<double>> eigenvalues;         // per node, filtered, descending
  std::vector<std::vector<double>> raw_eigenvalues;     // per node, unfiltered
  /// ritz_by_iteration[j-1][k]: filtered Ritz values of T_j[k] (track_ritz).
  std::vector<std::vector<std::vector<double>>> ritz_by_iteration;
  CMatrix v_history;  // K x (iterations+1); column j-1 = v(j)
  CMatrix w_history;  // K x iterations;     column j-1 = w(j)
  std::vector<NodeState> nodes;
  DlaErrorTrace trace;
  MessageAudit audit;
  bool clamped = false;
  int iterations_run = 0;
};

/// Runs the DLA. v1 must satisfy sum_k |v1[k]|^2 = 1 and 1 <= M <= K.
DlaResult dla_run(const CMatrix& y, consensus::Consensus& ac, int iterations,
                  const CVector& v1, const DlaOptions& options = {});

struct DlaWErrorPrediction {
  CVector predicted;
  /// |e_ii| exceeded 0.1 ||w(j-1)||^2 / K at some node (first-order expansion
  /// no longer trustworthy).
  bool taylor_violation = false;
};

/// First-order prediction of w(j)[k] - w_ideal(j)[k] (j is 1-based):
///   (K/N) e_i[k]^H y_k
///   - [(K/N)(e_i[k]^T Y^H v(j) + v(j)^H Y conj(e_i[k])) + (K^2/N)||e_i[k]||^2] v(j)[k]
///   - K / (2 ||w(j-1)||) e_ii(j-1)[k] v(j-1)[k]
DlaWErrorPrediction predict_dla_w_error(const DlaErrorTrace& trace, const CMatrix& y,
                                        const DlaResult& run, int j);

/// Default DLA starting vector 1/sqrt(K) at every node.
CVector default_dla_start(int k);

}  // namespace eigennet::dec_eig
