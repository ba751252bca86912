#include "eigennet/dec_eig.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace eigennet::dec_eig {

namespace {

using consensus::Consensus;
using consensus::ConsensusResult;

// Node-local kernels. Each reads only the node's own samples and scalars
// plus its row of a consensus output.

// Row k of the vector-AC input: conj(v[k]) * y_k^T.
Eigen::RowVectorXcd weighted_row(const NodeState& node, Complex v) {
  return std::conj(v) * node.y.transpose();
}

// (K/N) z^H y_k
Complex project(const NodeState& node, const Eigen::RowVectorXcd& z, int k) {
  const double n = static_cast<double>(node.y.size());
  return (static_cast<double>(k) / n) * (z.conjugate() * node.y)(0);
}

std::vector<NodeState> make_nodes(const CMatrix& y) {
  std::vector<NodeState> nodes(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index k = 0; k < y.rows(); ++k) {
    nodes[k].id = static_cast<int>(k);
    nodes[k].y = y.row(k).transpose();
  }
  return nodes;
}

void check_inputs(const CMatrix& y, const Consensus& ac, const CVector& start) {
  if (y.rows() < 1 || y.cols() < 1) throw InvalidArgument("empty sample matrix");
  if (ac.node_count() != y.rows()) {
    throw InvalidArgument("consensus engine has " + std::to_string(ac.node_count()) +
                          " nodes, samples have " + std::to_string(y.rows()) + " rows");
  }
  if (start.size() != y.rows()) throw InvalidArgument("starting vector length must equal K");
}

// Eigenvalue stage shared by dpm_run and its probe: vector AC on
// conj(v) y_k, scalar AC on |v|^2, then (K/N) ||z||^2 / d locally.
struct EigenStage {
  ConsensusResult vec;
  ConsensusResult scal;
  std::vector<Complex> lambda;
};

EigenStage eigen_stage(const std::vector<NodeState>& nodes, const CVector& v, Consensus& ac) {
  const auto k = static_cast<int>(nodes.size());
  const Eigen::Index n = nodes.front().y.size();
  CMatrix z0(k, n);
  CMatrix s0(k, 1);
  for (int i = 0; i < k; ++i) {
    z0.row(i) = weighted_row(nodes[i], v[i]);
    s0(i, 0) = std::norm(v[i]);
  }
  EigenStage st;
  st.vec = ac.run(z0);
  st.scal = ac.run(s0);
  st.lambda.resize(static_cast<std::size_t>(k));
  const double scale = static_cast<double>(k) / static_cast<double>(n);
  for (int i = 0; i < k; ++i) {
    const Complex d = st.scal.z(i, 0);
    const double num = st.vec.z.row(i).squaredNorm();
    st.lambda[i] = d == Complex{} ? Complex{std::numeric_limits<double>::quiet_NaN(), 0.0}
                                  : scale * num / d;
  }
  return st;
}

}  // namespace

void MessageAudit::record(const ConsensusResult& result, bool vector_call) {
  if (vector_call) {
    ++ac_n_calls;
  } else {
    ++ac_1_calls;
  }
  ++time_periods;
  if (units_per_node.empty()) units_per_node.assign(result.scalars_sent.size(), 0);
  for (std::size_t k = 0; k < result.scalars_sent.size(); ++k) {
    units_per_node[k] += result.scalars_sent[k];
  }
}

MessageAudit expected_dpm_audit(const topology::Graph& g, int m, int n, int i) {
  MessageAudit a;
  a.ac_n_calls = m + 1;
  a.ac_1_calls = 1;
  a.time_periods = m + 2;
  for (int k = 0; k < g.node_count(); ++k) {
    a.units_per_node.push_back(static_cast<long long>(i) * (static_cast<long long>(m) * n + n + 1) *
                               g.degree(k));
  }
  return a;
}

MessageAudit expected_dla_audit(const topology::Graph& g, int m, int n, int i) {
  MessageAudit a;
  a.ac_n_calls = m;
  a.ac_1_calls = m;
  a.time_periods = 2 * m;
  for (int k = 0; k < g.node_count(); ++k) {
    a.units_per_node.push_back(static_cast<long long>(i) * (static_cast<long long>(m) * n + m) *
                               g.degree(k));
  }
  return a;
}

AuditCheck audit_messages(const MessageAudit& actual, const MessageAudit& expected) {
  auto fail = [](std::string what, long long got, long long want) {
    return AuditCheck{false, what + ": simulated " + std::to_string(got) + ", expected " +
                                 std::to_string(want)};
  };
  if (actual.ac_n_calls != expected.ac_n_calls) {
    return fail("AC_N calls", actual.ac_n_calls, expected.ac_n_calls);
  }
  if (actual.ac_1_calls != expected.ac_1_calls) {
    return fail("AC_1 calls", actual.ac_1_calls, expected.ac_1_calls);
  }
  if (actual.time_periods != expected.time_periods) {
    return fail("time periods", actual.time_periods, expected.time_periods);
  }
  if (actual.units_per_node.size() != expected.units_per_node.size()) {
    return fail("node count", static_cast<long long>(actual.units_per_node.size()),
                static_cast<long long>(expected.units_per_node.size()));
  }
  for (std::size_t k = 0; k < actual.units_per_node.size(); ++k) {
    if (actual.units_per_node[k] != expected.units_per_node[k]) {
      return fail("units at node " + std::to_string(k), actual.units_per_node[k],
                  expected.units_per_node[k]);
    }
  }
  return {};
}

DpmResult dpm_run(const CMatrix& y, Consensus& ac, int iterations, const CVector& v0,
                  const DpmOptions& options) {
  check_inputs(y, ac, v0);
  if (iterations < 1) throw InvalidArgument("dpm_run: iterations must be >= 1");
  if (v0.norm() == 0.0) throw InvalidArgument("dpm_run: zero starting vector");

  const auto k = static_cast<int>(y.rows());
  const Eigen::Index n = y.cols();
  const double scale = static_cast<double>(k) / static_cast<double>(n);

  DpmResult out;
  out.nodes = make_nodes(y);
  out.v_history = CMatrix::Zero(k, iterations + 1);
  for (int i = 0; i < k; ++i) out.nodes[i].v_cur = v0[i];
  out.v_history.col(0) = v0;

  CMatrix z0(k, n);
  for (int j = 1; j <= iterations; ++j) {
    for (int i = 0; i < k; ++i) z0.row(i) = weighted_row(out.nodes[i], out.nodes[i].v_cur);
    ConsensusResult res = ac.run(z0);
    out.audit.record(res, true);

    CVector d(k);
    for (int i = 0; i < k; ++i) {
      auto& node = out.nodes[i];
      node.v_prev = node.v_cur;
      node.v_cur = project(node, res.z.row(i), k);
      out.v_history(i, j) = node.v_cur;
      d[i] = scale * (res.error.row(i).conjugate() * node.y)(0);
    }
    out.trace.d.push_back(std::move(d));
    out.trace.e1.push_back(std::move(res.error));

    if (options.probe != nullptr) {
      const auto probe = eigen_stage(out.nodes, out.v_history.col(j), *options.probe);
      std::vector<double> est;
      est.reserve(probe.lambda.size());
      for (auto l : probe.lambda) est.push_back(l.real());
      out.estimates_by_iteration.push_back(std::move(est));
    }
  }

  const CVector v_m = out.v_history.col(iterations);
  auto stage = eigen_stage(out.nodes, v_m, ac);
  out.audit.record(stage.vec, true);
  out.audit.record(stage.scal, false);
  out.trace.e2 = stage.vec.error;
  out.trace.e3 = stage.scal.error.col(0);

  out.lambda1.resize(static_cast<std::size_t>(k));
  out.lambda1_complex = stage.lambda;
  for (int i = 0; i < k; ++i) {
    if (std::isnan(stage.lambda[i].real())) {
      throw DegenerateRun("dpm_run: zero denominator at node " + std::to_string(i));
    }
    out.lambda1[i] = stage.lambda[i].real();
    out.nodes[i].lambda_est = {out.lambda1[i]};
  }

  const auto pred = predict_lambda1_error(out.trace, y, v_m);
  out.trace.e_num = pred.e_num;
  out.trace.e_den = pred.e_den;
  return out;
}

CVector predict_dpm_vector_error(const DpmErrorTrace& trace, const CMatrix& r, const CVector& v0,
                                 int iterations) {
  if (static_cast<int>(trace.d.size()) < iterations) {
    throw InvalidArgument("predict_dpm_vector_error: trace shorter than M");
  }
  // Horner form of R^M v0 + sum_j R^{M-j} d(j).
  CVector v = v0;
  for (int j = 1; j <= iterations; ++j) v = r * v + trace.d[j - 1];
  return v;
}

Lambda1ErrorPrediction predict_lambda1_error(const DpmErrorTrace& trace, const CMatrix& y,
                                             const CVector& v_m) {
  const auto k = y.rows();
  const double n = static_cast<double>(y.cols());
  const double kd = static_cast<double>(k);
  if (trace.e2.rows() != k || trace.e3.size() != k) {
    throw InvalidArgument("predict_lambda1_error: final-stage errors not recorded");
  }
  const CVector yhv = y.adjoint() * v_m;  // Y^H v
  const double vrv = yhv.squaredNorm() / n;
  const double vv = v_m.squaredNorm();

  Lambda1ErrorPrediction out;
  out.e_num.resize(k);
  out.e_den.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const CVector e = trace.e2.row(i).transpose();
    const Complex cross = (e.transpose() * yhv)(0) + (yhv.adjoint() * e.conjugate())(0);
    out.e_num[i] = (kd / n) * cross + (kd * kd / n) * e.squaredNorm();
    out.e_den[i] = kd * trace.e3[i];
    out.reconstructed.push_back((vrv + out.e_num[i]) / (vv + out.e_den[i]));
  }
  return out;
}

ConvergenceTrace convergence_trace(const DpmResult& run, const CVector& u1) {
  ConvergenceTrace out;
  const double u_norm = u1.norm();
  for (Eigen::Index j = 0; j < run.v_history.cols(); ++j) {
    const CVector v = run.v_history.col(j);
    const double nv = v.norm();
    double c2 = nv == 0.0 ? 0.0 : std::norm(u1.dot(v)) / (nv * nv * u_norm * u_norm);
    c2 = std::clamp(c2, 0.0, 1.0);
    out.sin_theta.push_back(std::sqrt(1.0 - c2));
  }
  for (const auto& d : run.trace.d) out.d_inf.push_back(d.cwiseAbs().maxCoeff());
  return out;
}

ConvergenceVerdict check_dpm_convergence_condition(const ConvergenceTrace& trace,
                                                   const eigencore::EigenSolution& spectrum,
                                                   int iterations) {
  ConvergenceVerdict v;
  v.sin_theta = trace.sin_theta;
  if (spectrum.values.size() < 2) {
    v.message = "spectrum needs at least two eigenvalues";
    return v;
  }
  const double l1 = spectrum.values[0];
  const double l2 = spectrum.values[1];
  if (!(l1 > 1.0)) {
    v.message = "precondition violated: lambda1 = " + std::to_string(l1) + " <= 1";
    return v;
  }
  if (trace.sin_theta.empty() || trace.sin_theta.front() >= 1.0 - 1e-15) {
    v.message = "precondition violated: cos(theta(0)) = 0";
    return v;
  }
  if (static_cast<int>(trace.d_inf.size()) < iterations || iterations < 2) {
    v.message = "trace shorter than the requested window";
    return v;
  }
  v.precondition_ok = true;

  const double log_rate = std::log(l1 / std::max(l2, 1.0));
  std::vector<double> xs;
  std::vector<double> ys;
  bool all_zero = true;
  for (int j = std::max(1, iterations / 2); j <= iterations; ++j) {
    const double d = trace.d_inf[j - 1];
    if (d == 0.0) continue;
    all_zero = false;
    xs.push_back(j);
    ys.push_back(std::log(d) + std::log(j + 1.0) - j * log_rate);
  }
  if (all_zero || xs.size() < 2) {
    v.condition_satisfied = true;
    v.rate_margin = -std::numeric_limits<double>::infinity();
    v.message = "consensus errors vanish over the window";
    return v;
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  v.rate_margin = sxy / sxx;
  v.condition_satisfied = v.rate_margin < 0.0 && ys.back() < ys.front();
  v.message = v.condition_satisfied ? "errors decay faster than the admissible rate"
                                    : "errors do not decay faster than the admissible rate";
  return v;
}

CMatrix rescale_samples(const CMatrix& y, double target_lambda1) {
  const auto values = eigencore::covariance_eigenvalues(y);
  if (values.empty() || !(values.front() > 0.0)) {
    throw DegenerateRun("rescale_samples: zero covariance");
  }
  return y * std::sqrt(target_lambda1 / values.front());
}

CVector default_dla_start(int k) {
  return CVector::Constant(k, Complex{1.0 / std::sqrt(static_cast<double>(k)), 0.0});
}

namespace {

std::vector<double> filtered_ritz(const eigencore::TridiagonalMatrix& t,
                                  const std::vector<double>& raw,
                                  const std::vector<double>& previous, int k, int n,
                                  const DlaOptions& options) {
  double scale = 0.0;
  for (double x : raw) scale = std::max(scale, std::abs(x));
  const double tol = options.spurious_rel_tol * scale;
  auto kept = eigencore::filter_spurious(raw, previous, k, n, tol);
  if (options.cullum_willoughby) kept = eigencore::cullum_willoughby_filter(t, kept, tol);
  return kept;
}

}  // namespace

DlaResult dla_run(const CMatrix& y, Consensus& ac, int iterations, const CVector& v1,
                  const DlaOptions& options) {
  check_inputs(y, ac, v1);
  const auto k = static_cast<int>(y.rows());
  const Eigen::Index n = y.cols();
  if (iterations < 1 || iterations > k) {
    throw InvalidArgument("dla_run: iterations must satisfy 1 <= M <= K");
  }
  if (std::abs(v1.squaredNorm() - 1.0) > 1e-10) {
    throw InvalidArgument("dla_run: starting values must satisfy sum |v1[k]|^2 = 1");
  }
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);

  DlaResult out;
  out.nodes = make_nodes(y);
  out.v_history = CMatrix::Zero(k, iterations + 1);
  out.w_history = CMatrix::Zero(k, iterations);
  for (int i = 0; i < k; ++i) {
    out.nodes[i].v_cur = v1[i];
    out.nodes[i].beta_hist = {0.0};
  }
  out.v_history.col(0) = v1;

  CMatrix z0(k, n);
  CMatrix s0(k, 1);
  for (int j = 1; j <= iterations; ++j) {
    for (int i = 0; i < k; ++i) {
      const auto& node = out.nodes[i];
      z0.row(i) = node.terminated ? Eigen::RowVectorXcd::Zero(n) : weighted_row(node, node.v_cur);
    }
    ConsensusResult vec = ac.run(z0);
    out.audit.record(vec, true);

    for (int i = 0; i < k; ++i) {
      auto& node = out.nodes[i];
      if (node.terminated) {
        node.w = 0.0;
        continue;
      }
      const double alpha = kd * kd / nd * vec.z.row(i).squaredNorm();
      node.alpha_hist.push_back(alpha);
      node.w = project(node, vec.z.row(i), k) - alpha * node.v_cur -
               node.beta_hist.back() * node.v_prev;
      out.w_history(i, j - 1) = node.w;
    }

    // Measured deviation from the ideal Lanczos step taken from the same
    // v(j), v(j-1) and w(j-1). Simulation-only; nodes never read it.
    {
      const CVector v = out.v_history.col(j - 1);
      const CVector v_prev = j >= 2 ? CVector(out.v_history.col(j - 2)) : CVector::Zero(k);
      const double w_prev_norm = j >= 2 ? out.w_history.col(j - 2).norm() : 0.0;
      const CVector rv = y * (y.adjoint() * v) / nd;
      const double alpha_ideal = v.dot(rv).real();
      const CVector w_ideal = rv - alpha_ideal * v - w_prev_norm * v_prev;
      out.trace.e_w.push_back(out.w_history.col(j - 1) - w_ideal);
    }
    out.trace.e_i.push_back(std::move(vec.error));

    for (int i = 0; i < k; ++i) s0(i, 0) = std::norm(out.nodes[i].w);
    ConsensusResult scal = ac.run(s0);
    out.audit.record(scal, false);
    out.trace.e_ii.push_back(scal.error.col(0));

    for (int i = 0; i < k; ++i) {
      auto& node = out.nodes[i];
      if (node.terminated) continue;
      double b = scal.z(i, 0).real();
      if (b < 0.0) {
        b = 0.0;
        node.clamped = true;
        out.clamped = true;
      }
      const double beta = std::sqrt(kd * b);
      double scale = 0.0;
      for (double a : node.alpha_hist) scale = std::max(scale, std::abs(a));
      node.beta_hist.push_back(beta);
      node.v_prev = node.v_cur;
      if (beta <= options.breakdown_rel * scale || beta == 0.0) {
        node.v_cur = 0.0;
        if (j < iterations) node.terminated = true;
      } else {
        node.v_cur = node.w / beta;
      }
      out.v_history(i, j) = node.v_cur;
    }
    out.iterations_run = j;
    if (std::all_of(out.nodes.begin(), out.nodes.end(),
                    [](const NodeState& s) { return s.terminated; })) {
      break;
    }
  }

  // Local post-processing: T[k], its eigenvalues and spurious filtering.
  out.t.resize(static_cast<std::size_t>(k));
  out.eigenvalues.resize(static_cast<std::size_t>(k));
  out.raw_eigenvalues.resize(static_cast<std::size_t>(k));
  if (options.track_ritz) {
    out.ritz_by_iteration.assign(static_cast<std::size_t>(iterations),
                                 std::vector<std::vector<double>>(static_cast<std::size_t>(k)));
  }
  for (int i = 0; i < k; ++i) {
    auto& node = out.nodes[i];
    auto& t = out.t[i];
    t.alpha = node.alpha_hist;
    const auto m = static_cast<int>(t.alpha.size());
    t.beta.assign(node.beta_hist.begin() + 1, node.beta_hist.begin() + m);

    out.raw_eigenvalues[i] = eigencore::tridiagonal_eigenvalues(t);
    // The rank criterion compares against the previous filtered list, so a
    // spurious value never becomes a reference for later iterations.
    std::vector<double> kept;
    for (int j = 1; j <= m; ++j) {
      const auto sub = t.leading(j);
      const auto raw = j == m ? out.raw_eigenvalues[i] : eigencore::tridiagonal_eigenvalues(sub);
      kept = filtered_ritz(sub, raw, kept, k, static_cast<int>(n), options);
      if (options.track_ritz) out.ritz_by_iteration[j - 1][i] = kept;
    }
    if (options.track_ritz) {
      for (int j = m + 1; j <= iterations; ++j) out.ritz_by_iteration[j - 1][i] = kept;
    }
    out.eigenvalues[i] = kept;
    node.lambda_est = out.eigenvalues[i];
  }
  return out;
}

DlaWErrorPrediction predict_dla_w_error(const DlaErrorTrace& trace, const CMatrix& y,
                                        const DlaResult& run, int j) {
  if (j < 1 || j > static_cast<int>(trace.e_i.size())) {
    throw InvalidArgument("predict_dla_w_error: iteration out of range");
  }
  const auto k = y.rows();
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(y.cols());
  const CVector v = run.v_history.col(j - 1);
  const CVector yhv = y.adjoint() * v;
  const CMatrix& e_i = trace.e_i[j - 1];

  DlaWErrorPrediction out;
  out.predicted = CVector::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const CVector e = e_i.row(i).transpose();
    const CVector yk = y.row(i).transpose();
    const Complex term1 = (kd / nd) * e.dot(yk);
    const Complex cross = (e.transpose() * yhv)(0) + (yhv.adjoint() * e.conjugate())(0);
    const Complex alpha_err = (kd / nd) * cross + (kd * kd / nd) * e.squaredNorm();
    out.predicted[i] = term1 - alpha_err * v[i];
  }
  if (j >= 2) {
    const CVector v_prev = run.v_history.col(j - 2);
    const double w_prev = run.w_history.col(j - 2).norm();
    const CVector& e_ii = trace.e_ii[j - 2];
    for (Eigen::Index i = 0; i < k; ++i) {
      if (std::abs(e_ii[i]) > 0.1 * w_prev * w_prev / kd) out.taylor_violation = true;
      if (w_prev > 0.0) out.predicted[i] -= kd / (2.0 * w_prev) * e_ii[i] * v_prev[i];
    }
  }
  return out;
}

}  // namespace eigennet::dec_eig
