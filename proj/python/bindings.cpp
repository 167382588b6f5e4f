#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "routecorr/routecorr.hpp"

namespace py = pybind11;
using namespace routecorr;

namespace {

OdPair to_od(std::pair<NodeId, NodeId> p) { return {p.first, p.second}; }
std::pair<NodeId, NodeId> from_od(const OdPair& od) { return {od.origin, od.destination}; }

py::dict grid_row(const MseRow& r) {
  py::dict d;
  d["model"] = model_name(r.model);
  d["variant"] = r.variant;
  d["dmin"] = r.delta_min;
  d["cv"] = r.cv;
  d["prob_mse_x1e4"] = r.prob_mse_x1e4;
  d["fcm_mse_x1e3"] = r.fcm_mse_x1e3;
  d["rcm_mse_x1e3"] = r.rcm_mse_x1e3;
  d["prob_mse_se"] = r.prob_mse_se;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "routecorr native core";

  // later registrations are tried first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::class_<Link>(m, "Link")
      .def(py::init<LinkId, NodeId, NodeId, double>(), py::arg("id"), py::arg("tail"), py::arg("head"),
           py::arg("impedance"))
      .def_readonly("id", &Link::id)
      .def_readonly("tail", &Link::tail)
      .def_readonly("head", &Link::head)
      .def_readonly("impedance", &Link::impedance)
      .def("__repr__", [](const Link& l) {
        return "Link(" + std::to_string(l.id) + ", " + std::to_string(l.tail) + "->" + std::to_string(l.head) +
               ", " + std::to_string(l.impedance) + ")";
      });

  py::class_<Network>(m, "Network")
      .def(py::init([](std::vector<Link> links) { return Network({}, std::move(links)); }), py::arg("links"))
      .def_property_readonly("nodes", &Network::nodes)
      .def_property_readonly("links", &Network::links)
      .def("impedance", &Network::impedance)
      .def("scaled", &Network::scaled)
      .def("serialize", [](const Network& n) { return serialize_network(n); });

  py::class_<ChoiceSet>(m, "ChoiceSet")
      .def_property_readonly("od", [](const ChoiceSet& c) { return from_od(c.od); })
      .def_property_readonly("routes",
                             [](const ChoiceSet& c) {
                               std::vector<std::vector<LinkId>> out;
                               for (const auto& r : c.routes) out.push_back(r.links);
                               return out;
                             })
      .def_property_readonly("impedances", &ChoiceSet::impedances)
      .def("__len__", &ChoiceSet::size);

  py::class_<Fixture>(m, "Fixture")
      .def_readonly("network", &Fixture::network)
      .def_property_readonly("od", [](const Fixture& f) { return from_od(f.od); });

  m.def("builtin_names", &builtin_names);
  m.def(
      "builtin_network", [](const std::string& name, const std::map<std::string, double>& params) {
        return builtin_network(name, Params(params.begin(), params.end()));
      },
      py::arg("name"), py::arg("params") = std::map<std::string, double>{});
  m.def(
      "resolve_network",
      [](const std::string& spec, std::optional<std::pair<NodeId, NodeId>> od) {
        return resolve_network(spec, od ? std::optional<OdPair>(to_od(*od)) : std::nullopt);
      },
      py::arg("spec"), py::arg("od") = py::none());
  m.def("load_network_file", [](const std::string& path) {
    auto f = load_network_file(path);
    std::vector<std::pair<NodeId, NodeId>> ods;
    for (const auto& od : f.od_pairs) ods.push_back(from_od(od));
    return py::make_tuple(f.network, ods);
  });

  m.def(
      "enumerate_efficient_routes",
      [](const Network& n, std::pair<NodeId, NodeId> od) { return enumerate_efficient_routes(n, to_od(od)); },
      py::arg("network"), py::arg("od"));
  m.def(
      "sample_choice_set",
      [](const Network& n, std::pair<NodeId, NodeId> od, std::uint64_t draws, double cv, std::uint64_t seed) {
        return sample_choice_set(n, to_od(od), draws, cv, seed);
      },
      py::arg("network"), py::arg("od"), py::arg("draws") = 1000, py::arg("cv") = 0.1, py::arg("seed") = 42);

  m.def(
      "model_probabilities",
      [](const std::string& model, const Network& n, const ChoiceSet& cs, double cv, double dmin, int weights) {
        return model_probabilities(parse_model(model), n, cs, cv, dmin, weight_formula_from_int(weights));
      },
      py::arg("model"), py::arg("network"), py::arg("choice_set"), py::arg("cv") = 0.1, py::arg("dmin") = 0.0,
      py::arg("weights") = 25);
  m.def(
      "mnp_probabilities",
      [](const Network& n, const ChoiceSet& cs, double cv, std::uint64_t draws, std::uint64_t seed,
         unsigned threads) {
        MnpResult r;
        {
          py::gil_scoped_release release;
          r = simulate_mnp_probabilities(n, cs, {xi_from_cv(cv, cs.min_impedance()), draws, seed, threads});
        }
        return py::make_tuple(r.probabilities, r.std_errors);
      },
      py::arg("network"), py::arg("choice_set"), py::arg("cv") = 0.1, py::arg("draws") = 1'000'000,
      py::arg("seed") = 42, py::arg("threads") = 0,
      "Simulated probit probabilities and their binomial standard errors.");

  m.def(
      "model_fcm",
      [](const std::string& model, const Network& n, const ChoiceSet& cs, double dmin, int weights) {
        return model_fcm(parse_model(model), n, cs, dmin, weight_formula_from_int(weights));
      },
      py::arg("model"), py::arg("network"), py::arg("choice_set"), py::arg("dmin") = 0.0, py::arg("weights") = 25);
  m.def(
      "ds_correlation", [](const Network& n, const ChoiceSet& cs) { return ds_moments(n, cs, 1.0).corr; },
      py::arg("network"), py::arg("choice_set"), "Target correlation: overlap / sqrt(C_k C_k').");
  m.def("reduce_to_rcm", &reduce_to_rcm, py::arg("cov"), py::arg("ref"));
  m.def(
      "anchored_rcm_reference",
      [](const Network& n, const ChoiceSet& cs) { return anchored_rcm_reference(overlap_matrix(n, cs)); },
      py::arg("network"), py::arg("choice_set"));

  m.def("mse_probabilities", [](const std::vector<double>& a, const std::vector<double>& b) {
    return mse_probabilities(a, b);
  });
  m.def("mse_correlations", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return mse_correlations(a, b, CorrSpace::Fcm);
  });

  m.def(
      "run_grid",
      [](const std::string& network, std::optional<std::pair<NodeId, NodeId>> od, const std::string& models,
         int weights, const std::string& dmin, const std::string& cv, std::uint64_t draws, std::uint64_t seed,
         unsigned threads, std::optional<std::filesystem::path> out) {
        ExperimentConfig cfg;
        cfg.network = network;
        if (od) cfg.od = to_od(*od);
        cfg.models = parse_model_list(models);
        cfg.weights = weight_formula_from_int(weights);
        cfg.delta_min = parse_grid(dmin);
        cfg.cv = parse_grid(cv);
        cfg.draws = draws;
        cfg.seed = seed;
        cfg.threads = threads;
        MseReport rep;
        {
          py::gil_scoped_release release;
          rep = run_grid(cfg);
          if (out) emit_outputs(rep, *out);
        }
        py::list rows;
        for (const auto& r : rep.rows) rows.append(grid_row(r));
        return rows;
      },
      py::arg("network") = "mesh2x2", py::arg("od") = py::none(),
      py::arg("models") = "mnl,lnl-const,lnl-arith,lnl-geom,pcl,conl", py::arg("weights") = 25,
      py::arg("dmin") = "0:1:0.1", py::arg("cv") = "0.1,0.2", py::arg("draws") = 1'000'000, py::arg("seed") = 42,
      py::arg("threads") = 0, py::arg("out") = py::none(),
      "MSE grid as a list of row dicts; writes the CSV files when out is given.");
}
