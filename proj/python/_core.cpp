#include <array>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "runner.hpp"
#include "yudovich/errors.hpp"
#include "yudovich/green.hpp"
#include "yudovich/modulus.hpp"
#include "yudovich/newton.hpp"
#include "yudovich/vortex.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace yudovich;

using P = std::array<double, 2>;

namespace {

Vec2 v(const P& p) { return {p[0], p[1]}; }
P p(Vec2 x) { return {x.x, x.y}; }

Domain make_domain(const std::string& kind, double r0, double R) {
    if (kind == "disk") return Domain::disk(R);
    if (kind == "annulus") return Domain::annulus(r0, R);
    throw py::value_error("domain must be 'disk' or 'annulus'");
}

py::dict integrate_vortices(std::shared_ptr<const GreenEvaluator> green, const std::vector<P>& positions,
                            const std::vector<double>& strengths, std::vector<double> circulations, double T,
                            double tol, const std::string& method) {
    VortexSystem sys;
    for (const auto& x : positions) sys.positions.push_back(v(x));
    sys.strengths = strengths;
    if (circulations.empty()) circulations.assign(static_cast<std::size_t>(green->d()), 0.0);
    sys.circulations = circulations;
    sys.green = std::move(green);
    IntegrateOptions o;
    o.tol = tol;
    if (method == "taylor") o.method = Method::taylor;
    else if (method != "rk45") throw py::value_error("method must be 'rk45' or 'taylor'");
    VortexTrajectory tr;
    {
        py::gil_scoped_release nogil;
        tr = integrate(sys, T, o);
    }
    std::vector<std::vector<P>> z;
    for (const auto& row : tr.positions) {
        std::vector<P> r;
        for (const Vec2& x : row) r.push_back(p(x));
        z.push_back(std::move(r));
    }
    return py::dict("times"_a = tr.times, "positions"_a = z, "energy"_a = tr.W, "step_sizes"_a = tr.step_sizes,
                    "hamiltonian_drift"_a = hamiltonian_drift(tr), "termination"_a = tr.termination.describe(),
                    "end_time"_a = tr.end_time());
}

py::dict second_derivatives(const Density& f, const P& x, std::optional<double> eps) {
    SecondDerivatives s;
    {
        py::gil_scoped_release nogil;
        s = eps ? mollified_second_derivatives(f, v(x), *eps) : newton_second_derivatives(f, v(x));
    }
    Eigen::Matrix2d u;
    u << s.u[0][0], s.u[0][1], s.u[1][0], s.u[1][1];
    return py::dict("u"_a = u, "trace"_a = s.trace(), "asymmetry"_a = s.asymmetry(), "budget"_a = s.budget);
}

std::pair<int, std::string> run(const std::string& subcommand, const std::string& scenario) {
    cli::Outcome o;
    try {
        const auto j = cli::json::parse(scenario);
        py::gil_scoped_release nogil;
        o = cli::run_pipeline(subcommand, j, {});
    } catch (const cli::SchemaError& e) {
        throw py::value_error(e.what());
    } catch (const cli::json::exception& e) {
        throw py::value_error(e.what());
    }
    cli::json out = {{"exit", o.exit}, {"status", o.status}, {"diagnostics", o.diagnostics}};
    for (const auto& f : o.files) out["files"][f.name] = f.content;
    return {o.exit, out.dump()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Point vortices, Green functions, Osgood moduli and Newton potentials";

    py::class_<GreenEvaluator, std::shared_ptr<GreenEvaluator>>(m, "Green")
        .def_property_readonly("backend", &GreenEvaluator::backend_name)
        .def_property_readonly("holes", &GreenEvaluator::d)
        .def("G", [](const GreenEvaluator& g, const P& x, const P& y) { return g.G(v(x), v(y)); }, "x"_a, "y"_a)
        .def("grad_G", [](const GreenEvaluator& g, const P& x, const P& y) { return p(g.grad_G(v(x), v(y))); }, "x"_a, "y"_a)
        .def("robin", [](const GreenEvaluator& g, const P& x) { return g.robin(v(x)); }, "x"_a)
        .def("phi", [](const GreenEvaluator& g, int i, const P& x) { return g.phi(i, v(x)); }, "i"_a, "x"_a)
        .def("harmonic_field", [](const GreenEvaluator& g, int k, const P& x) { return p(g.harmonic_field(k, v(x))); }, "k"_a, "x"_a)
        .def_property_readonly("period_matrix", [](const GreenEvaluator& g) { return g.period_matrix().M; })
        .def_property_readonly("boundary_residual", &GreenEvaluator::boundary_residual);

    m.def(
        "green",
        [](const std::string& domain, double r0, double R, const std::string& backend) {
            GreenOptions o;
            if (backend == "mfs") o.backend = GreenOptions::Backend::mfs;
            else if (backend == "analytic") o.backend = GreenOptions::Backend::analytic;
            else if (backend != "auto") throw py::value_error("backend must be 'auto', 'analytic' or 'mfs'");
            return std::const_pointer_cast<GreenEvaluator>(build_green(make_domain(domain, r0, R), o));
        },
        "domain"_a = "disk", "r0"_a = 0.5, "R"_a = 1.0, "backend"_a = "auto");

    m.def("integrate_vortices", &integrate_vortices, "green"_a, "positions"_a, "strengths"_a,
          "circulations"_a = std::vector<double>{}, "T"_a = 1.0, "tol"_a = 1e-10, "method"_a = "rk45");

    py::class_<Modulus>(m, "Modulus")
        .def_static("power", &Modulus::power, "r"_a, "a"_a)
        .def_static("h_log", &Modulus::h_log, "C"_a, "a"_a)
        .def_static("log_inverse", &Modulus::log_inverse, "q"_a, "a"_a)
        .def_static(
            "theta", [](int m, double C, double a) { return Modulus::from_germ(Germ::theta_m(m), C, a); }, "m"_a, "C"_a,
            "a"_a)
        .def("__call__", &Modulus::operator(), "h"_a)
        .def("__repr__", &Modulus::describe);

    py::class_<GammaFamily>(m, "GammaFamily")
        .def(py::init<Modulus, double, double>(), "mu"_a, "kappa"_a, "T"_a)
        .def_property_readonly("a_tilde", &GammaFamily::a_tilde)
        .def("__call__", &GammaFamily::operator(), "t"_a, "h"_a);

    py::class_<Density>(m, "Density")
        .def_static(
            "constant", [](double c, const P& center, double R) { return Density::constant(c, v(center), R); }, "value"_a,
            "center"_a = P{0, 0}, "radius"_a = 1.0)
        .def_static(
            "linear", [](const P& a, double b, const P& center, double R) { return Density::linear(v(a), b, v(center), R); },
            "gradient"_a, "offset"_a, "center"_a = P{0, 0}, "radius"_a = 1.0)
        .def_static(
            "radial",
            [](std::function<double(double)> f, std::optional<Modulus> mu, const P& center, double R) {
                // profile is called from worker threads: take the GIL per call
                auto wrapped = [f = std::move(f)](double r) {
                    py::gil_scoped_acquire gil;
                    return f(r);
                };
                return Density::radial(wrapped, std::move(mu), v(center), R);
            },
            "profile"_a, "mu"_a = std::nullopt, "center"_a = P{0, 0}, "radius"_a = 1.0)
        .def("__call__", [](const Density& f, const P& x) { return f(v(x)); }, "x"_a);

    m.def(
        "newton_potential",
        [](const Density& f, const P& x) {
            py::gil_scoped_release nogil;
            return newton_potential(f, v(x));
        },
        "f"_a, "x"_a);
    m.def("newton_second_derivatives", &second_derivatives, "f"_a, "x"_a, "eps"_a = std::nullopt);

    m.def("run_scenario_json", &run, "subcommand"_a, "scenario"_a);
    m.def("self_check", [] {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto& c : cli::self_check({})) {
            const char* s = c.state == cli::CheckLine::State::pass ? "pass" : c.state == cli::CheckLine::State::fail ? "fail" : "skip";
            out.emplace_back(c.name, s, c.detail);
        }
        return out;
    });

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
}
