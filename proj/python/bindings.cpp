#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "boxguard/clustering.hpp"
#include "boxguard/error.hpp"
#include "boxguard/geometry.hpp"
#include "boxguard/guarantee.hpp"
#include "boxguard/io.hpp"
#include "boxguard/monitor.hpp"
#include "boxguard/simharness.hpp"
#include "boxguard/speclang.hpp"
#include "boxguard/stats.hpp"

namespace py = pybind11;
using namespace boxguard;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Box-abstraction runtime monitors with statistical guarantees";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NoEvidenceError>(m, "NoEvidenceError");
  py::register_exception<NoMassError>(m, "NoMassError");
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::enum_<Polarity>(m, "Polarity")
      .value("POSITIVE", Polarity::Positive)
      .value("NEGATIVE", Polarity::Negative);

  py::class_<AbstractionBox>(m, "AbstractionBox")
      .def(py::init<>())
      .def_readwrite("center", &AbstractionBox::center)
      .def_readwrite("radius", &AbstractionBox::radius)
      .def_readwrite("cluster_id", &AbstractionBox::cluster_id)
      .def_readwrite("count", &AbstractionBox::count)
      .def_readwrite("label", &AbstractionBox::label)
      .def_readwrite("polarity", &AbstractionBox::polarity)
      .def("__repr__", [](const AbstractionBox &b) {
        return "<AbstractionBox " + b.cluster_id + " m=" +
               std::to_string(b.count) + ">";
      });

  m.def("box_contains",
        [](const AbstractionBox &b, const std::vector<double> &x) {
          return box_contains(b, x);
        });
  m.def(
      "box_from_points",
      [](const std::vector<FeatureVector> &points, std::string id,
         std::string label, Polarity p) {
        return box_from_points(points, std::move(id), std::move(label), p);
      },
      py::arg("points"), py::arg("cluster_id"), py::arg("label"),
      py::arg("polarity") = Polarity::Positive);
  m.def("box_inflate", &box_inflate, py::arg("box"), py::arg("scale"),
        py::arg("floor") = 0.0);

  py::class_<ClusteringResult>(m, "ClusteringResult")
      .def_readonly("assignments", &ClusteringResult::assignments)
      .def_readonly("centroids", &ClusteringResult::centroids)
      .def_readonly("k", &ClusteringResult::k)
      .def_readonly("iterations", &ClusteringResult::iterations)
      .def_readonly("converged", &ClusteringResult::converged);
  m.def(
      "kmeans",
      [](const std::vector<FeatureVector> &points, std::size_t k,
         std::uint64_t seed, std::size_t max_iter, double tol) {
        return kmeans(points, KMeansOptions{k, seed, max_iter, tol});
      },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0,
      py::arg("max_iter") = 100, py::arg("tol") = 1e-9);
  m.def("choose_k", &choose_k);

  py::class_<MonitoredSample>(m, "MonitoredSample")
      .def(py::init([](FeatureVector f, std::string p, bool c) {
             return MonitoredSample{std::move(f), std::move(p), c};
           }),
           py::arg("features"), py::arg("predicted"), py::arg("correct"))
      .def_readwrite("features", &MonitoredSample::features)
      .def_readwrite("predicted", &MonitoredSample::predicted)
      .def_readwrite("correct", &MonitoredSample::correct);

  py::class_<MonitorConfig>(m, "MonitorConfig")
      .def(py::init<>())
      .def_readwrite("k", &MonitorConfig::k)
      .def_readwrite("seed", &MonitorConfig::seed)
      .def_readwrite("tau", &MonitorConfig::tau)
      .def_readwrite("eta", &MonitorConfig::eta)
      .def_readwrite("m_min", &MonitorConfig::m_min)
      .def_readwrite("max_iter", &MonitorConfig::max_iter)
      .def_readwrite("tol", &MonitorConfig::tol);

  py::enum_<VerdictKind>(m, "VerdictKind")
      .value("ACCEPT", VerdictKind::Accept)
      .value("REJECT", VerdictKind::Reject)
      .value("UNCERTAIN", VerdictKind::Uncertain);

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("kind", &Verdict::kind)
      .def_readonly("hits", &Verdict::hits)
      .def_readonly("no_coverage", &Verdict::no_coverage);

  py::class_<Monitor>(m, "Monitor")
      .def_property_readonly("dimension", &Monitor::dimension)
      .def_property_readonly("boxes", &Monitor::boxes)
      .def_property_readonly("config", &Monitor::config)
      .def("query",
           [](const Monitor &mon, const std::vector<double> &x,
              const std::string &label) { return mon.query(x, label); })
      .def("confirmed_boxes", &Monitor::confirmed_boxes)
      .def("digest", &io::monitor_digest)
      .def("save", [](const Monitor &mon, const std::filesystem::path &p) {
        io::save_monitor(mon, p);
      })
      .def_static("load", &io::load_monitor);

  m.def(
      "build_monitor",
      [](const std::vector<MonitoredSample> &samples,
         const MonitorConfig &config) { return build_monitor(samples, config); },
      py::arg("samples"), py::arg("config") = MonitorConfig{});

  py::class_<BoxGuarantee>(m, "BoxGuarantee")
      .def_readonly("cluster_id", &BoxGuarantee::cluster_id)
      .def_readonly("evidence", &BoxGuarantee::evidence)
      .def_readonly("errors", &BoxGuarantee::errors)
      .def_readonly("empirical_error", &BoxGuarantee::empirical_error)
      .def_readonly("epsilon", &BoxGuarantee::epsilon)
      .def_readonly("delta", &BoxGuarantee::delta);

  py::class_<CoverageGuarantee>(m, "CoverageGuarantee")
      .def_readonly("n_holdout", &CoverageGuarantee::n_holdout)
      .def_readonly("misses", &CoverageGuarantee::misses)
      .def_readonly("epsilon", &CoverageGuarantee::epsilon)
      .def_readonly("delta", &CoverageGuarantee::delta);

  py::class_<ComponentGuarantee>(m, "ComponentGuarantee")
      .def_readonly("epsilon", &ComponentGuarantee::epsilon)
      .def_readonly("delta", &ComponentGuarantee::delta)
      .def_readonly("vacuous", &ComponentGuarantee::vacuous)
      .def_readonly("coverage", &ComponentGuarantee::coverage)
      .def_readonly("boxes", &ComponentGuarantee::boxes)
      .def_readonly("no_evidence", &ComponentGuarantee::no_evidence);

  m.def("hoeffding_epsilon", &hoeffding_epsilon, py::arg("m"), py::arg("delta"));
  m.def("clopper_pearson_upper", &clopper_pearson_upper, py::arg("misses"),
        py::arg("n"), py::arg("delta"));
  m.def(
      "generalization_error",
      [](const std::map<std::string, bool> &correct,
         const std::map<std::string, double> &profile) {
        return generalization_error(correct, OperationalProfile(profile));
      },
      py::arg("correct"), py::arg("profile"));
  m.def(
      "assess",
      [](const Monitor &mon, const std::vector<MonitoredSample> &holdout,
         std::size_t m_min, double delta_cov, double delta_box,
         bool split_box_delta) {
        AssessConfig c;
        c.m_min = m_min;
        c.delta_cov = delta_cov;
        c.delta_box = delta_box;
        c.split_box_delta = split_box_delta;
        return assess(mon, holdout, c);
      },
      py::arg("monitor"), py::arg("holdout"), py::arg("m_min") = 1,
      py::arg("delta_cov") = 0.05, py::arg("delta_box") = 0.05,
      py::arg("split_box_delta") = false);

  py::enum_<Truth>(m, "Truth")
      .value("FALSE", Truth::False)
      .value("UNKNOWN", Truth::Unknown)
      .value("TRUE", Truth::True);

  py::class_<Formula>(m, "Formula")
      .def("__str__", &pretty)
      .def("__eq__", &Formula::operator==)
      .def_property_readonly("depth", &Formula::depth);
  m.def("parse", [](const std::string &text) { return parse(text); });
  m.def("pretty", &pretty);
  m.def(
      "eval3",
      [](const Formula &f, const std::vector<std::map<std::string, Truth>> &states,
         std::size_t t) { return eval3(f, Trace(states), t); },
      py::arg("formula"), py::arg("trace"), py::arg("t") = 0);
  m.def("atoms_of", [](const Formula &f) {
    std::vector<std::string> names;
    for (const auto &a : atoms_of(f))
      names.push_back(a.name);
    return names;
  });

  m.def(
      "gen_samples",
      [](const std::string &distribution_json, std::uint64_t seed,
         std::size_t n) {
        return gen_samples(
            io::distribution_from_json(io::json::parse(distribution_json)), seed,
            n);
      },
      py::arg("distribution_json"), py::arg("seed"), py::arg("n"));
}
