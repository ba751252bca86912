#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "eigennet/consensus.hpp"
#include "eigennet/dec_eig.hpp"
#include "eigennet/detection.hpp"
#include "eigennet/eigencore.hpp"
#include "eigennet/harness.hpp"
#include "eigennet/signal_model.hpp"
#include "eigennet/topology.hpp"

namespace py = pybind11;
using namespace eigennet;

namespace {

consensus::AcConfig ac_config(const topology::Graph& g, const std::string& engine, int iterations,
                              double link_failure_prob, std::uint64_t seed) {
  return consensus::AcConfig::make(consensus::engine_from_string(engine), iterations, g, link_failure_prob, seed);
}

}  // namespace

PYBIND11_MODULE(eigennet, m) {
  m.doc() = "Decentralized eigenvalue estimation over average-consensus networks";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<DegenerateRun>(m, "DegenerateRun", PyExc_RuntimeError);

  py::class_<topology::Graph>(m, "Graph")
      .def(py::init<int, std::vector<topology::Edge>>(), py::arg("node_count"), py::arg("edges"))
      .def_property_readonly("node_count", &topology::Graph::node_count)
      .def("degree", &topology::Graph::degree)
      .def("neighbors", &topology::Graph::neighbors)
      .def("is_connected", &topology::Graph::is_connected)
      .def("edges", &topology::Graph::edges)
      .def_static("complete", &topology::Graph::complete)
      .def_static("path", &topology::Graph::path);

  m.def("random_geometric_graph",
        [](int k, double radius, std::uint64_t seed) { return topology::generate_random_geometric(k, radius, seed); },
        py::arg("k"), py::arg("radius"), py::arg("seed"));
  m.def("parse_edge_list", [](const std::string& text) { return topology::parse_edge_list(text); });
  m.def("metropolis_weights", [](const topology::Graph& g) { return topology::metropolis_weights(g).w; });

  m.def(
      "consensus",
      [](const CMatrix& z0, const topology::Graph& g, const std::string& engine, int iterations,
         double link_failure_prob, std::uint64_t seed) {
        return consensus::run_consensus(z0, ac_config(g, engine, iterations, link_failure_prob, seed)).z;
      },
      py::arg("z0"), py::arg("graph"), py::arg("engine") = "chebyshev", py::arg("iterations") = 30,
      py::arg("link_failure_prob") = 0.0, py::arg("seed") = 0);

  m.def("sample_covariance", &eigencore::sample_covariance);
  m.def("covariance_eigenvalues", &eigencore::covariance_eigenvalues);
  m.def(
      "power_method",
      [](const CMatrix& r, const CVector& v0, int iterations) {
        const auto res = eigencore::power_method(r, v0, iterations);
        return py::make_tuple(res.lambda1, res.v);
      },
      py::arg("r"), py::arg("v0"), py::arg("iterations"));
  m.def(
      "lanczos",
      [](const CMatrix& r, const CVector& v1, int iterations) {
        const auto res = eigencore::lanczos(r, v1, iterations);
        return py::make_tuple(res.t.alpha, res.t.beta);
      },
      py::arg("r"), py::arg("v1"), py::arg("iterations"));
  m.def(
      "tridiagonal_eigenvalues",
      [](std::vector<double> alpha, std::vector<double> beta) {
        return eigencore::tridiagonal_eigenvalues({std::move(alpha), std::move(beta)});
      },
      py::arg("alpha"), py::arg("beta"));
  m.def("hermitian_eigenvalues",
        [](const CMatrix& r) { return eigencore::dense_hermitian_eig(r, {.want_vectors = false}).values; });

  m.def(
      "dpm",
      [](const CMatrix& y, const topology::Graph& g, int iterations, const CVector& v0, const std::string& engine,
         int ac_iterations) {
        consensus::SimulatedConsensus ac(ac_config(g, engine, ac_iterations, 0.0, 0));
        return dec_eig::dpm_run(y, ac, iterations, v0).lambda1;
      },
      "Per-node largest-eigenvalue estimates", py::arg("y"), py::arg("graph"), py::arg("iterations"), py::arg("v0"),
      py::arg("engine") = "chebyshev", py::arg("ac_iterations") = 30);
  m.def(
      "dla",
      [](const CMatrix& y, const topology::Graph& g, int iterations, const std::string& engine, int ac_iterations,
         double spurious_rel_tol) {
        consensus::SimulatedConsensus ac(ac_config(g, engine, ac_iterations, 0.0, 0));
        dec_eig::DlaOptions opts;
        opts.spurious_rel_tol = spurious_rel_tol;
        return dec_eig::dla_run(y, ac, iterations, dec_eig::default_dla_start(static_cast<int>(y.rows())), opts)
            .eigenvalues;
      },
      "Per-node filtered Ritz values", py::arg("y"), py::arg("graph"), py::arg("iterations"),
      py::arg("engine") = "chebyshev", py::arg("ac_iterations") = 30, py::arg("spurious_rel_tol") = 1e-3);

  m.def(
      "gen_samples",
      [](int k, int n, std::vector<double> snr_db, double sigma2, std::uint64_t seed) {
        signal_model::SignalConfig sc;
        sc.k = k;
        sc.n = n;
        sc.p = static_cast<int>(snr_db.size());
        sc.snr_db = std::move(snr_db);
        sc.sigma2 = sigma2;
        sc.seed = seed;
        return sc.p == 0 ? signal_model::gen_h0(sc) : signal_model::gen_h1(sc).y;
      },
      "K x N samples; an empty snr_db list gives noise only", py::arg("k"), py::arg("n"),
      py::arg("snr_db") = std::vector<double>{}, py::arg("sigma2") = 1.0, py::arg("seed") = 0);

  m.def(
      "statistic",
      [](const std::string& kind, const std::vector<double>& eigenvalues, std::optional<double> sigma2,
         std::optional<double> trace) {
        return detection::compute_statistic(detection::statistic_from_string(kind), eigenvalues, {sigma2, trace})
            .value;
      },
      py::arg("kind"), py::arg("eigenvalues"), py::arg("sigma2") = std::nullopt, py::arg("trace") = std::nullopt);
  m.def("calibrate_threshold",
        [](const std::vector<double>& h0, double alpha) { return detection::calibrate_threshold(h0, alpha); });
  m.def("roc_curve", [](const std::vector<double>& h0, const std::vector<double>& h1) {
    std::vector<std::tuple<double, double, double>> out;
    for (const auto& p : detection::roc_curve(h0, h1)) out.emplace_back(p.threshold, p.pfa, p.pd);
    return out;
  });

  m.def(
      "run_experiment",
      [](const std::string& config_text, std::optional<std::string> out_dir) {
        const auto cfg = harness::validate_config(config_text);
        const auto report = harness::run(cfg);
        if (out_dir) harness::emit_csv(report, *out_dir);
        py::dict d;
        d["ok"] = report.ok;
        d["report_json"] = harness::report_json(report);
        d["convergence_csv"] = harness::convergence_csv(report.convergence);
        d["roc_csv"] = harness::roc_csv(report.roc);
        d["audit_csv"] = harness::audit_csv(report.audit);
        return d;
      },
      "Validates a key = value config, runs it, and returns the result tables as text", py::arg("config"),
      py::arg("out_dir") = std::nullopt);
}
