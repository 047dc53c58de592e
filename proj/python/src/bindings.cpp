#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "weakkam/acceptance.hpp"
#include "weakkam/aubry_mather.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/foliation.hpp"
#include "weakkam/green.hpp"
#include "weakkam/pseudograph.hpp"
#include "weakkam/twist_map.hpp"
#include "weakkam/weak_kam.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace weakkam;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
    Array a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

Array to_array(const GridFunction& g) { return to_array(g.values); }

GridFunction to_grid(const Array& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
    return GridFunction(std::vector<double>(a.data(), a.data() + a.size()));
}

SolverOptions solver_options(std::size_t n_grid, double tol, int window, std::size_t max_iters) {
    SolverOptions o;
    o.n_grid = n_grid;
    o.tol = tol;
    o.window = window;
    o.max_iters = max_iters;
    return o;
}

py::tuple point_tuple(MapPoint p) { return py::make_tuple(p.theta, p.r); }

// Rows of an n x m array become the columns u(., c_j).
FoliationSurface surface_from_array(const Array& u, const std::vector<double>& c_values) {
    if (u.ndim() != 2) throw std::invalid_argument("expected an (n, m) array");
    const auto n = static_cast<std::size_t>(u.shape(0));
    const auto m = static_cast<std::size_t>(u.shape(1));
    if (m != c_values.size()) throw std::invalid_argument("column count does not match c_values");
    std::vector<GridFunction> columns(m, GridFunction::constant(n, 0.0));
    const auto view = u.unchecked<2>();
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < n; ++i) columns[j][i] = view(i, j);
    return FoliationSurface(c_values, std::move(columns));
}

Array surface_to_array(const FoliationSurface& s) {
    Array a({static_cast<py::ssize_t>(s.n()), static_cast<py::ssize_t>(s.m())});
    auto view = a.mutable_unchecked<2>();
    for (std::size_t i = 0; i < s.n(); ++i)
        for (std::size_t j = 0; j < s.m(); ++j) view(i, j) = s.value(i, j);
    return a;
}

py::dict straighten_dict(const StraightenResult& r) {
    py::dict d("verdict"_a = to_string(r.verdict), "stage"_a = r.stage, "c1_defect"_a = r.c1_defect,
               "min_slope"_a = r.min_slope, "area_residual"_a = r.area_residual,
               "exact_up_to_vertical_shift"_a = r.exact_up_to_vertical_shift);
    d["witness"] = r.witness ? py::object(py::make_tuple(r.witness->c, r.witness->theta, r.witness->value))
                             : py::object(py::none());
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weak KAM solutions, pseudographs and Aubry-Mather sets of twist maps of the annulus.";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<BracketFailure>(m, "BracketFailure", error.ptr());
    py::register_exception<NonMonotone>(m, "NonMonotone", error.ptr());
    py::register_exception<WindowTooSmall>(m, "WindowTooSmall", error.ptr());
    py::register_exception<NoConvergence>(m, "NoConvergence", error.ptr());
    py::register_exception<MethodDisagreement>(m, "MethodDisagreement", error.ptr());
    py::register_exception<ExtrapolationUnstable>(m, "ExtrapolationUnstable", error.ptr());
    py::register_exception<PlateauDetectionAmbiguous>(m, "PlateauDetectionAmbiguous", error.ptr());
    py::register_exception<NotSemiConcave>(m, "NotSemiConcave", error.ptr());
    py::register_exception<RangeTooNarrow>(m, "RangeTooNarrow", error.ptr());
    py::register_exception<TooManyCorners>(m, "TooManyCorners", error.ptr());
    py::register_exception<NoDescentProgress>(m, "NoDescentProgress", error.ptr());
    py::register_exception<OrbitEscape>(m, "OrbitEscape", error.ptr());
    py::register_exception<SlopeBlowup>(m, "SlopeBlowup", error.ptr());
    py::register_exception<NotInvariant>(m, "NotInvariant", error.ptr());
    py::register_exception<NonPositiveTorsion>(m, "NonPositiveTorsion", error.ptr());
    py::register_exception<NotInvariantFoliation>(m, "NotInvariantFoliation", error.ptr());

    // twist_map
    py::class_<GeneratingFamily>(m, "GeneratingFamily")
        .def_static("integrable", &GeneratingFamily::integrable, "kinetic"_a = 1.0)
        .def_static("standard", &GeneratingFamily::standard, "k"_a, "kinetic"_a = 1.0)
        .def_static("conjugated", &GeneratingFamily::conjugated, "beta"_a = 0.05, "gamma"_a = 0.05,
                    "kinetic"_a = 1.0)
        .def_static("parse", [](const std::string& token) { return GeneratingFamily::parse(token); }, "token"_a)
        .def_property_readonly("token", &GeneratingFamily::token)
        .def_property_readonly("band_r", &GeneratingFamily::band_r)
        .def_property_readonly("twist_upper_bound", &GeneratingFamily::twist_upper_bound)
        .def("S", &GeneratingFamily::eval, "theta"_a, "theta_next"_a)
        .def("d1", &GeneratingFamily::d1, "theta"_a, "theta_next"_a)
        .def("d2", &GeneratingFamily::d2, "theta"_a, "theta_next"_a)
        .def("forward", [](const GeneratingFamily& f, double theta, double r) {
            return point_tuple(forward_map(f, {theta, r}));
        }, "theta"_a, "r"_a)
        .def("inverse", [](const GeneratingFamily& f, double theta, double r) {
            return point_tuple(inverse_map(f, {theta, r}));
        }, "theta"_a, "r"_a)
        .def("__repr__", [](const GeneratingFamily& f) { return "GeneratingFamily('" + f.token() + "')"; });

    // weak_kam
    py::class_<WeakKamSolution>(m, "WeakKamSolution")
        .def_readonly("c", &WeakKamSolution::c)
        .def_readonly("alpha", &WeakKamSolution::alpha)
        .def_readonly("residual", &WeakKamSolution::residual)
        .def_readonly("domination_violation", &WeakKamSolution::domination_violation)
        .def_readonly("critical_cycle", &WeakKamSolution::critical_cycle)
        .def_readonly("winding", &WeakKamSolution::winding)
        .def_property_readonly("u", [](const WeakKamSolution& s) { return to_array(s.u); });

    m.def("solve_alpha", [](const GeneratingFamily& f, double c, std::size_t n_grid, double tol, int window,
                            std::size_t max_iters) {
        const auto s = solve_alpha(f, c, solver_options(n_grid, tol, window, max_iters));
        return py::dict("alpha"_a = s.alpha, "u"_a = to_array(s.u), "residual"_a = s.residual,
                        "iterations"_a = s.iterations, "critical_cycle"_a = s.critical_cycle,
                        "winding"_a = s.winding, "grid_rotation"_a = s.grid_rotation());
    }, "family"_a, "c"_a, "n_grid"_a = 1024, "tol"_a = 1e-9, "window"_a = 0, "max_iters"_a = 0);

    m.def("weak_kam_solution", [](const GeneratingFamily& f, double c, std::size_t n_grid, double tol,
                                  int window, std::size_t max_iters) {
        return weak_kam_solution(f, c, solver_options(n_grid, tol, window, max_iters));
    }, "family"_a, "c"_a, "n_grid"_a = 1024, "tol"_a = 1e-9, "window"_a = 0, "max_iters"_a = 0);

    m.def("rotation_number", [](const GeneratingFamily& f, double c, std::size_t n_grid) {
        const auto r = rotation_number(f, c, solver_options(n_grid, 1e-9, 0, 0));
        return py::make_tuple(r.from_alpha, r.from_orbit);
    }, "family"_a, "c"_a, "n_grid"_a = 1024,
          "Rotation number from the alpha derivative and from an orbit; raises MethodDisagreement.");

    m.def("discounted_solution", [](const GeneratingFamily& f, double c, std::size_t n_grid) {
        DiscountOptions o;
        o.solver.n_grid = n_grid;
        const auto s = discounted_solution(f, c, o);
        return py::dict("alpha"_a = s.alpha, "limit"_a = to_array(s.limit), "lambdas"_a = s.lambdas,
                        "extrapolation_jump"_a = s.extrapolation_jump, "mather_integral"_a = s.mather_integral,
                        "mather_check_passed"_a = s.mather_check_passed);
    }, "family"_a, "c"_a, "n_grid"_a = 1024);

    m.def("build_selection", [](const GeneratingFamily& f, double c_min, double c_max, std::size_t n_c,
                                std::size_t n_grid, int q_max, double plateau_tol, unsigned seed) {
        SelectionOptions o;
        o.solver.n_grid = n_grid;
        o.q_max = q_max;
        o.plateau_tol = plateau_tol;
        o.seed = seed;
        const auto s = build_selection(f, c_min, c_max, n_c, o);
        Array u({static_cast<py::ssize_t>(s.n_grid()), static_cast<py::ssize_t>(s.rows.size())});
        Array du_dc({static_cast<py::ssize_t>(s.n_grid()), static_cast<py::ssize_t>(s.rows.size())});
        auto uv = u.mutable_unchecked<2>();
        auto dv = du_dc.mutable_unchecked<2>();
        std::vector<double> alpha;
        for (std::size_t j = 0; j < s.rows.size(); ++j) {
            alpha.push_back(s.rows[j].alpha);
            for (std::size_t i = 0; i < s.n_grid(); ++i) {
                uv(i, j) = s.rows[j].u[i];
                dv(i, j) = s.du_dc(j, i);
            }
        }
        py::list plateaus;
        for (const auto& p : s.plateaus)
            plateaus.append(py::dict("p"_a = p.p, "q"_a = p.q, "a1"_a = p.a1, "a2"_a = p.a2,
                                     "first_row"_a = p.first_row, "last_row"_a = p.last_row));
        return py::dict("c"_a = to_array(s.c_grid), "alpha"_a = to_array(alpha), "rho"_a = to_array(s.rho),
                        "u"_a = u, "du_dc"_a = du_dc, "plateaus"_a = plateaus,
                        "plateau_interior"_a = s.plateau_interior);
    }, "family"_a, "c_min"_a, "c_max"_a, "n_c"_a, "n_grid"_a = 1024, "q_max"_a = 8, "plateau_tol"_a = 1e-6,
          "seed"_a = 1u, "Selection surface; u and du_dc have shape (n_grid, n_c).");

    // pseudograph
    py::class_<Pseudograph>(m, "Pseudograph")
        .def_property_readonly("c", &Pseudograph::c)
        .def_property_readonly("lower", [](const Pseudograph& g) {
            std::vector<double> v;
            for (const auto& n : g.nodes()) v.push_back(n.lower);
            return to_array(v);
        })
        .def_property_readonly("upper", [](const Pseudograph& g) {
            std::vector<double> v;
            for (const auto& n : g.nodes()) v.push_back(n.upper);
            return to_array(v);
        })
        .def_property_readonly("corner_count", &Pseudograph::corner_count)
        .def("is_corner", &Pseudograph::is_corner, "node"_a)
        .def("distance_to", [](const Pseudograph& g, double theta, double r) { return g.distance_to({theta, r}); },
             "theta"_a, "r"_a)
        .def("__len__", &Pseudograph::size);

    m.def("full_pseudograph", [](double c, const Array& u) { return full_pseudograph(c, to_grid(u)); }, "c"_a,
          "u"_a);
    m.def("hausdorff_distance", &hausdorff_distance, "a"_a, "b"_a);
    m.def("check_vertical_order", [](const Pseudograph& below, const Pseudograph& above, double rho_below,
                                     double rho_above) {
        const auto r = check_vertical_order(below, above, rho_below, rho_above);
        return py::make_tuple(r.margin, r.pass);
    }, "below"_a, "above"_a, "rho_below"_a, "rho_above"_a, "Returns (margin, pass).");
    m.def("circle_map_images", [](const GeneratingFamily& f, const Pseudograph& g) {
        const auto cm = circle_map(f, g);
        std::vector<double> img(cm.size());
        for (std::size_t i = 0; i < cm.size(); ++i) img[i] = cm.node_image(i);
        return to_array(img);
    }, "family"_a, "graph"_a, "Lifted images of the nodes under the projected dynamics.");

    // aubry_mather
    m.def("mather_set", [](const GeneratingFamily& f, long p, long q, std::size_t restarts, unsigned seed) {
        const auto s = mather_set(f, p, q, restarts, seed);
        py::list orbits;
        for (const auto& o : s.orbits)
            orbits.append(py::dict("thetas"_a = to_array(o.thetas), "action"_a = o.action,
                                   "stationarity"_a = o.stationarity));
        return py::dict("p"_a = s.p, "q"_a = s.q, "orbits"_a = orbits, "min_action"_a = s.min_action,
                        "continuum"_a = s.continuum);
    }, "family"_a, "p"_a, "q"_a, "restarts"_a = 5, "seed"_a = 1u);
    m.def("crossing_count", [](const std::vector<double>& a, const std::vector<double>& b) {
        return crossing_count(a, b);
    }, "a"_a, "b"_a);

    // green
    m.def("green_slopes", [](const GeneratingFamily& f, double theta, double r, int n_max) {
        const auto g = green_slopes(f, {theta, r}, n_max);
        return py::dict("forward"_a = to_array(g.forward), "backward"_a = to_array(g.backward),
                        "s_plus"_a = g.s_plus, "s_minus"_a = g.s_minus, "nesting_margin"_a = g.nesting_margin(),
                        "bracket_width"_a = g.bracket_width());
    }, "family"_a, "theta"_a, "r"_a, "n_max"_a = 20);
    m.def("rational_leaf_density", [](const GeneratingFamily& f, const Array& leaf, int q) {
        const auto d = rational_leaf_density(f, to_grid(leaf), q);
        return py::dict("torsion"_a = to_array(d.torsion), "density"_a = to_array(d.density),
                        "conjugacy"_a = to_array(d.conjugacy), "inverse_sqrt_integral"_a = d.inverse_sqrt_integral);
    }, "family"_a, "leaf"_a, "q"_a);

    // foliation
    py::class_<FoliationSurface>(m, "FoliationSurface")
        .def(py::init(&surface_from_array), "u"_a, "c_values"_a, "u has shape (n, m); column j samples u(., c_j).")
        .def_static("read_csv", [](const std::string& path) {
            std::ifstream in(path);
            if (!in) throw std::invalid_argument("cannot open " + path);
            return FoliationSurface::read_csv(in);
        }, "path"_a)
        .def_property_readonly("n", &FoliationSurface::n)
        .def_property_readonly("m", &FoliationSurface::m)
        .def_property_readonly("c_values", &FoliationSurface::c_values)
        .def_property_readonly("u", &surface_to_array)
        .def("leaf", [](const FoliationSurface& s, std::size_t j) { return to_array(s.leaf_column(j)); }, "column"_a)
        .def("du_dc", [](const FoliationSurface& s, std::size_t j) { return to_array(s.du_dc_column(j)); },
             "column"_a);

    m.def("straighten_test", [](const FoliationSurface& s, double c1_tol, double mono_tol) {
        return straighten_dict(straighten_test(s, {c1_tol, mono_tol}));
    }, "surface"_a, "c1_tol"_a = 1e-3, "mono_tol"_a = 1e-3);
    m.def("lipschitz_integrability_test", [](const FoliationSurface& s, double c1_tol, double mono_tol) {
        const auto r = lipschitz_integrability_test(s, {c1_tol, mono_tol});
        return py::dict("pass"_a = r.pass, "stage"_a = r.stage, "k"_a = r.k, "lipschitz_fine"_a = r.lipschitz_fine,
                        "lipschitz_coarse"_a = r.lipschitz_coarse);
    }, "surface"_a, "c1_tol"_a = 1e-3, "mono_tol"_a = 1e-3);
    m.def("standard_foliation", &standard_foliation, "n"_a, "c_values"_a);
    m.def("conjugated_foliation", [](const GeneratingFamily& f, std::size_t n, std::vector<double> c) {
        if (!f.conjugacy()) throw std::invalid_argument("family has no conjugacy profile");
        return conjugated_foliation(*f.conjugacy(), n, std::move(c));
    }, "family"_a, "n"_a, "c_values"_a);
    m.def("triangle_wave_foliation", &triangle_wave_foliation, "n"_a, "c_values"_a);
    m.def("smooth_wave_foliation", &smooth_wave_foliation, "n"_a, "c_values"_a);

    // acceptance
    m.def("acceptance_criteria", [] {
        py::list out;
        for (const auto& c : acceptance_criteria())
            out.append(py::make_tuple(c.id, c.name, c.description));
        return out;
    });
    m.def("run_acceptance", [](const std::string& only, std::size_t n_grid, unsigned seed) {
        AcceptanceOptions o;
        o.only = only;
        o.n_grid = n_grid;
        o.seed = seed;
        std::vector<CriterionResult> results;
        {
            py::gil_scoped_release release;
            results = run_acceptance(o);
        }
        py::list out;
        for (const auto& r : results)
            out.append(py::dict("id"_a = r.info.id, "name"_a = r.info.name, "pass"_a = r.pass, "got"_a = r.got,
                                "expected"_a = r.expected, "tolerance"_a = r.tolerance, "note"_a = r.note,
                                "seconds"_a = r.seconds));
        return out;
    }, "only"_a = "", "n_grid"_a = 1024, "seed"_a = 1u);
}
