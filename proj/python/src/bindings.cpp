#include "fsard/analysis.hpp"
#include "fsard/combinatorics.hpp"
#include "fsard/error.hpp"
#include "fsard/markov.hpp"
#include "fsard/optimizer.hpp"
#include "fsard/serialize.hpp"
#include "fsard/simulator.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

namespace py = pybind11;
using namespace fsard;

namespace {

std::vector<double> pmf_list(const CountPmf &pmf) { return {pmf.mass().begin(), pmf.mass().end()}; }

/// Nested Python containers from a serialized record.
py::object to_python(const Json &record) {
    return py::module_::import("json").attr("loads")(record.dump());
}

std::vector<std::vector<double>> matrix_rows(const StochasticMatrix &matrix) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < matrix.size(); ++i) rows.emplace_back(matrix.row(i).begin(), matrix.row(i).end());
    return rows;
}

py::object optimization_dict(const OptimizationResult &result) {
    Json record = to_json(result);
    Json trace = Json::array();
    for (const auto &point : result.trace)
        trace.push_back({{"M", point.frame_size}, {"param", point.param}, {"aaoi", json_number(point.aaoi)},
                         {"halfwidth", point.halfwidth}});
    record["trace"] = trace;
    return to_python(record);
}

SchemeSpec scheme_spec(const std::string &scheme, int users, int frame_size, int mini_slots, double rho,
                       double gamma, double tau) {
    const Scheme kind = parse_scheme(scheme);
    if (kind == Scheme::slotted_aloha) return SchemeSpec::slotted_aloha({users, rho, tau});
    return SchemeSpec::framed(kind, {users, frame_size, mini_slots, rho, gamma});
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Age of information for framed reservation ALOHA and slotted ALOHA";
    m.attr("__version__") = std::string(library_version());

    py::class_<ProtocolConfig>(m, "ProtocolConfig")
        .def(py::init([](int n, int m_, int v, double rho, double gamma) {
                 ProtocolConfig c{n, m_, v, rho, gamma};
                 c.validate();
                 return c;
             }),
             py::arg("N"), py::arg("M"), py::arg("V"), py::arg("rho"), py::arg("gamma"))
        .def_readonly("N", &ProtocolConfig::users)
        .def_readonly("M", &ProtocolConfig::frame_size)
        .def_readonly("V", &ProtocolConfig::mini_slots)
        .def_readonly("rho", &ProtocolConfig::rho)
        .def_readonly("gamma", &ProtocolConfig::gamma)
        .def("__repr__", [](const ProtocolConfig &c) {
            return "ProtocolConfig(" + to_json(c).dump() + ")";
        });

    m.def("reservation_count_pmf", [](int i, double gamma) { return pmf_list(reservation_count_pmf(i, gamma)); },
          py::arg("i"), py::arg("gamma"));
    m.def("singleton_count_pmf", [](int j, int v) { return pmf_list(singleton_count_pmf(j, v)); }, py::arg("j"),
          py::arg("V"));
    m.def("capped_success_pmf", [](int j, int v, int m_) { return pmf_list(capped_success_pmf(j, v, m_)); },
          py::arg("j"), py::arg("V"), py::arg("M"));
    m.def("successful_update_pmf",
          [](int i, double gamma, int v, int m_) { return pmf_list(successful_update_pmf(i, gamma, v, m_)); },
          py::arg("i"), py::arg("gamma"), py::arg("V"), py::arg("M"));

    m.def("transition_matrix", [](const ProtocolConfig &c) { return matrix_rows(build_transition_matrix(c)); },
          py::arg("config"));
    m.def("steady_state", [](const ProtocolConfig &c) { return steady_state(build_transition_matrix(c)).pi; },
          py::arg("config"));

    m.def("analyze",
          [](const ProtocolConfig &c, const std::string &scheme) {
              const Scheme kind = parse_scheme(scheme);
              if (kind == Scheme::slotted_aloha) throw DomainError("slotted ALOHA has no analytical model");
              return to_python(to_json(kind == Scheme::fsa_rd ? aaoi_fsa_rd(c) : aaoi_fsa_rd_one(c)));
          },
          py::arg("config"), py::arg("scheme") = "fsa-rd", "Analytical report as a dict.");
    m.def("collision_free_prob", &collision_free_prob, py::arg("config"));
    m.def("near_optimal_gamma", &near_optimal_gamma, py::arg("N"), py::arg("V"), py::arg("M"), py::arg("rho"));

    m.def("simulate",
          [](const std::string &scheme, int n, double rho, int m_, int v, double gamma, double tau,
             std::int64_t horizon, std::int64_t warmup, std::uint64_t seed, bool trace) {
              const SchemeSpec spec = scheme_spec(scheme, n, m_, v, rho, gamma, tau);
              SimOptions options;
              options.record_trace = trace;
              SimResult result;
              {
                  py::gil_scoped_release release;
                  result = simulate(spec, horizon, warmup < 0 ? default_warmup(spec) : warmup, seed, options);
              }
              return to_python(to_json(result));
          },
          py::arg("scheme"), py::arg("N"), py::arg("rho"), py::arg("M") = 2, py::arg("V") = 1, py::arg("gamma") = 1.0,
          py::arg("tau") = 1.0, py::arg("horizon") = 10'000'000, py::arg("warmup") = -1, py::arg("seed") = 1,
          py::arg("trace") = false, "Simulation result as a dict; warmup < 0 selects the default.");

    m.def("optimize_fsa_rd",
          [](int n, int v, double rho, std::vector<double> grid) {
              const bool defaults = grid.empty();
              if (defaults) grid = default_gamma_grid();
              OptimizationResult r;
              {
                  py::gil_scoped_release release;
                  r = optimize_fsa_rd(n, v, rho, grid, {defaults, 0});
              }
              return optimization_dict(r);
          },
          py::arg("N"), py::arg("V"), py::arg("rho"), py::arg("gamma_grid") = std::vector<double>{});
    m.def("optimize_fsa_rd_one", [](int n, int v, double rho) { return optimization_dict(optimize_fsa_rd_one(n, v, rho)); },
          py::arg("N"), py::arg("V"), py::arg("rho"));
}
