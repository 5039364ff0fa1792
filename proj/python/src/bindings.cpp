#include "ifmix/cli.hpp"
#include "ifmix/graph.hpp"
#include "ifmix/mixer.hpp"
#include "ifmix/recovery.hpp"
#include "ifmix/rng.hpp"
#include "ifmix/tudataset.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace ifmix;

namespace {

// Datasets stay on the C++ side; Python sees a small handle.
struct Dataset {
  GraphDataset ds;
  FeatureBasis basis;
  bool basis_ready = false;

  const FeatureBasis& vocabulary() {
    if (!basis_ready) {
      basis = feature_vocabulary(ds);
      basis_ready = true;
    }
    return basis;
  }
};

Dataset load(const std::string& dir, const std::string& name, const std::string& features) {
  return Dataset{load_tudataset({dir, name}, features), {}, false};
}

Graph item(const Dataset& d, std::size_t i) {
  if (i >= d.ds.size()) throw py::index_error("graph index out of range");
  return d.ds.graph(i);
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ifmix core bindings";

  py::register_exception<RecoveryError>(m, "RecoveryError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<Graph>(m, "Graph")
      .def(py::init([](Matrix features, Matrix weights) {
             Graph g(std::move(features), std::move(weights));
             auto report = validate_graph(g);
             if (!report.ok()) throw std::invalid_argument(report.violations.front());
             return g;
           }),
           py::arg("features"), py::arg("weights"))
      .def_readwrite("features", &Graph::features)
      .def_readwrite("weights", &Graph::weights)
      .def_property_readonly("num_nodes", &Graph::num_nodes)
      .def_property_readonly("feature_dim", &Graph::feature_dim)
      .def_property_readonly("num_edges", &Graph::num_edges)
      .def("is_binary", &Graph::is_binary)
      .def("__eq__", [](const Graph& a, const Graph& b) { return a == b; })
      .def("__repr__", [](const Graph& g) {
        std::ostringstream s;
        s << "Graph(nodes=" << g.num_nodes() << ", dim=" << g.feature_dim() << ")";
        return s.str();
      });

  py::class_<BetaParams>(m, "BetaParams")
      .def(py::init([](double a, double b) {
             BetaParams p{a, b};
             p.validate();
             return p;
           }),
           py::arg("alpha"), py::arg("beta"))
      .def_readonly("alpha", &BetaParams::alpha)
      .def_readonly("beta", &BetaParams::beta)
      .def("mean", &BetaParams::mean)
      .def("__repr__", &BetaParams::label);

  m.def("beta_pdf", &beta_pdf, py::arg("params"), py::arg("x"));
  m.def(
      "sample_lambda",
      [](const BetaParams& p, std::uint64_t seed, std::size_t count) {
        Rng rng(seed);
        std::vector<double> out(count);
        for (auto& v : out) v = sample_lambda(p, rng);
        return out;
      },
      py::arg("params"), py::arg("seed"), py::arg("count") = 1);

  m.def("mix_pair", &mix_pair, py::arg("a"), py::arg("b"), py::arg("lam"));
  m.def(
      "mix_labels",
      [](const Vector& a, const Vector& b, double lambda) {
        return mix_labels(LabelDistribution(a), LabelDistribution(b), lambda).p;
      },
      py::arg("a"), py::arg("b"), py::arg("lam"));

  m.def(
      "check_linear_independence",
      [](const Matrix& rows, double tol) {
        auto r = check_linear_independence(rows, tol);
        return py::make_tuple(r.independent, r.rank);
      },
      py::arg("rows"), py::arg("tol") = 1e-9);

  py::class_<FeatureBasis>(m, "FeatureBasis")
      .def_readonly("vocabulary", &FeatureBasis::vocabulary)
      .def_readonly("basis", &FeatureBasis::basis)
      .def_property_readonly("rank", &FeatureBasis::rank);

  m.def(
      "feature_vocabulary",
      [](const std::vector<Graph>& graphs) { return feature_vocabulary(graphs); },
      py::arg("graphs"));

  py::class_<RecoveredPair>(m, "RecoveredPair")
      .def_readonly("a", &RecoveredPair::a)
      .def_readonly("b", &RecoveredPair::b)
      .def_readonly("lam", &RecoveredPair::lambda)
      .def("sources_identical", &RecoveredPair::sources_identical);

  m.def(
      "recover_pair",
      [](const Graph& mixed, const FeatureBasis& basis, const std::string& mode, double tol) {
        auto md = mode == "basis" ? RecoveryMode::basis : RecoveryMode::independent;
        if (mode != "basis" && mode != "independent")
          throw std::invalid_argument("mode must be 'independent' or 'basis'");
        return recover_pair(mixed, basis, md, tol);
      },
      py::arg("mixed"), py::arg("basis"), py::arg("mode") = "independent",
      py::arg("tol") = 1e-9);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("name", [](const Dataset& d) { return d.ds.name; })
      .def_property_readonly("num_classes", [](const Dataset& d) { return d.ds.num_classes; })
      .def_property_readonly("feature_dim", [](const Dataset& d) { return d.ds.feature_dim; })
      .def("__len__", [](const Dataset& d) { return d.ds.size(); })
      .def("graph", &item, py::arg("index"))
      .def("label", [](const Dataset& d, std::size_t i) {
        if (i >= d.ds.size()) throw py::index_error("graph index out of range");
        return d.ds.label(i).p;
      })
      .def("vocabulary", &Dataset::vocabulary, py::return_value_policy::reference_internal);

  m.def("load_dataset", &load, py::arg("dir"), py::arg("name"), py::arg("features") = "auto");

  m.def(
      "dataset_stats",
      [](const Dataset& d) {
        auto s = dataset_stats(d.ds);
        py::dict out;
        out["graphs"] = s.stats.graphs;
        out["mean_nodes"] = s.stats.mean_nodes;
        out["mean_edges"] = s.stats.mean_edges;
        out["feature_dim"] = s.stats.feature_dim;
        out["num_classes"] = s.stats.num_classes;
        out["matches_reference"] = s.reference ? py::object(py::bool_(s.all_pass())) : py::none();
        return out;
      },
      py::arg("dataset"));

  py::class_<AuditReport>(m, "AuditReport")
      .def_readonly("dataset", &AuditReport::dataset)
      .def_readonly("assumption_satisfied", &AuditReport::assumption_satisfied)
      .def_readonly("mode", &AuditReport::mode)
      .def_readonly("assumption_detail", &AuditReport::assumption_detail)
      .def_readonly("trials", &AuditReport::trials)
      .def_readonly("collisions", &AuditReport::collisions)
      .def_readonly("recovery_failures", &AuditReport::recovery_failures)
      .def_readonly("identical_pairs", &AuditReport::identical_pairs)
      .def_readonly("first_failure", &AuditReport::first_failure)
      .def("to_json", [](const AuditReport& r) { return to_json(r); });

  m.def(
      "intrusion_audit",
      [](const Dataset& d, std::size_t trials, const BetaParams& p, std::uint64_t seed) {
        Rng rng(seed);
        py::gil_scoped_release release;
        return intrusion_audit(d.ds, trials, p, rng);
      },
      py::arg("dataset"), py::arg("trials"), py::arg("params"), py::arg("seed") = 0);

  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = run_command(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"),
      "Runs one ifmix command line; returns (exit_code, stdout, stderr).");
}
