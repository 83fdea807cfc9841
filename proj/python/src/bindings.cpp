#include "obstlab/cli.hpp"
#include "obstlab/heat.hpp"
#include "obstlab/obstacle.hpp"
#include "obstlab/regularity.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace obstlab;

namespace {

std::vector<py::ssize_t> shape_of(const Grid& g) {
    std::vector<py::ssize_t> shape(static_cast<std::size_t>(g.dim()), g.nodes_per_axis());
    shape.push_back(g.time_count());
    return shape;
}

ScalarField field_from(const Grid& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    if (static_cast<std::size_t>(a.size()) != g.size())
        throw ConfigError("array size does not match the grid");
    return ScalarField(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_array(const ScalarField& f) {
    py::array_t<double> out(shape_of(f.grid()));
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

SpaceTimePoint point(const std::vector<double>& x, double t) {
    SpaceTimePoint p{Vec(static_cast<Eigen::Index>(x.size())), t};
    for (std::size_t i = 0; i < x.size(); ++i) p.x[static_cast<Eigen::Index>(i)] = x[i];
    return p;
}

ModulusCurve curve_from(const std::vector<double>& radii, const std::vector<double>& values) {
    ModulusCurve c;
    c.radii = radii;
    c.values = values;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "obstlab core bindings";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](int n, double R, double T, double h, double dt, double t_final) {
                 return GridSpec{n, R, T, h, dt, t_final};
             }),
             py::arg("n") = 1, py::arg("R") = 1.0, py::arg("T") = 1.0, py::arg("h") = 0.05,
             py::arg("dt") = 0.0025, py::arg("t_final") = 0.0)
        .def_readwrite("n", &GridSpec::n)
        .def_readwrite("R", &GridSpec::R)
        .def_readwrite("T", &GridSpec::T)
        .def_readwrite("h", &GridSpec::h)
        .def_readwrite("dt", &GridSpec::dt)
        .def_readwrite("t_final", &GridSpec::t_final);

    py::class_<Grid>(m, "Grid")
        .def(py::init<const GridSpec&>())
        .def_property_readonly("dim", &Grid::dim)
        .def_property_readonly("h", &Grid::h)
        .def_property_readonly("dt", &Grid::dt)
        .def_property_readonly("shape", &shape_of)
        .def_property_readonly("r_min", &Grid::r_min)
        .def("coord", &Grid::coord)
        .def("time", &Grid::time);

    py::class_<ScalarField>(m, "Field")
        .def(py::init(&field_from), py::arg("grid"), py::arg("values"))
        .def_property_readonly("grid", &ScalarField::grid)
        .def("array", &to_array)
        .def("min", &ScalarField::min)
        .def("max", &ScalarField::max);

    m.def("manufacture",
          [](const Grid& g, const std::string& id, const CaseParams& params) {
              auto mc = manufacture(g, id, params);
              return py::make_tuple(mc.u, mc.f, metadata_record(mc.meta));
          },
          py::arg("grid"), py::arg("case_id"), py::arg("params") = CaseParams{},
          "Returns (u, f, metadata_json).");
    m.def("solve_heat", [](const ScalarField& f, const ScalarField& data) { return solve_heat(f, data).u; },
          py::arg("f"), py::arg("data"));
    m.def("solve_obstacle",
          [](const ScalarField& f, const ScalarField& data, double theta) {
              LcpOptions o;
              o.theta = theta;
              return solve_obstacle(f, data, o).u;
          },
          py::arg("f"), py::arg("data"), py::arg("theta") = 1.5);
    m.def("lcp_residual", &lcp_residual);

    m.def("omega",
          [](const ScalarField& f, const std::vector<double>& x, double t, double rho, double p) {
              return omega(f, point(x, t), rho, p);
          },
          py::arg("f"), py::arg("x"), py::arg("t"), py::arg("rho"), py::arg("p") = 2.0);
    m.def("omega_tilde",
          [](const ScalarField& f, const std::vector<double>& x, double t, double r, double p) {
              const auto o = omega_tilde(f, point(x, t), r, p);
              return py::make_tuple(o.value, o.c);
          },
          py::arg("f"), py::arg("x"), py::arg("t"), py::arg("r"), py::arg("p") = 2.0);
    m.def("n_tilde",
          [](const ScalarField& u, const std::vector<double>& x, double t, double r, double p) {
              return n_tilde(u, point(x, t), r, p);
          },
          py::arg("u"), py::arg("x"), py::arg("t"), py::arg("r"), py::arg("p") = 2.0);
    m.def("n_hat",
          [](const ScalarField& u, const ScalarField& f, const std::vector<double>& x, double t, double r, double p) {
              return n_hat(u, f, point(x, t), r, p);
          },
          py::arg("u"), py::arg("f"), py::arg("x"), py::arg("t"), py::arg("r"), py::arg("p") = 2.0);
    m.def("n_reg",
          [](const ScalarField& u, const std::vector<double>& x, double t, double rho, double p, double kappa) {
              const auto r = n_reg(u, point(x, t), rho, p, kappa);
              return py::make_tuple(r.value, std::vector<double>(r.nu.data(), r.nu.data() + r.nu.size()),
                                    r.degenerate);
          },
          py::arg("u"), py::arg("x"), py::arg("t"), py::arg("rho"), py::arg("p") = 2.0, py::arg("kappa") = 1.0);

    m.def("log_ladder", &log_ladder);
    m.def("parse_ladder", [](const std::string& s) { return parse_ladder(s); });
    m.def("dini_integral",
          [](const std::vector<double>& radii, const std::vector<double>& values, double r) {
              const auto d = dini_integral(curve_from(radii, values), r);
              py::dict out;
              out["value"] = d.value;
              out["ladder_part"] = d.ladder_part;
              out["tail"] = d.tail;
              out["exponent"] = d.exponent;
              out["tail_model"] = d.tail_model;
              out["dini"] = d.dini;
              return out;
          },
          py::arg("radii"), py::arg("values"), py::arg("r"));
    m.def("dini_bound",
          [](double n1, const std::vector<double>& radii, const std::vector<double>& values, double rho,
             double lambda, double mu) { return dini_bound(n1, curve_from(radii, values), rho, lambda, mu); },
          py::arg("n1"), py::arg("radii"), py::arg("values"), py::arg("rho"), py::arg("lam"), py::arg("mu"));

    m.def("run_cli",
          [](std::vector<std::string> args) {
              args.insert(args.begin(), "obstlab");
              std::vector<const char*> argv;
              for (const auto& a : args) argv.push_back(a.c_str());
              return run_cli(static_cast<int>(argv.size()), argv.data());
          },
          py::arg("args"), "Runs the command-line front end and returns its exit code.");
}
