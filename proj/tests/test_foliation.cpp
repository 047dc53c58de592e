#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "weakkam/errors.hpp"
#include "weakkam/foliation.hpp"
#include "weakkam/weak_kam.hpp"

using namespace weakkam;

namespace {

// Odd count keeps c = 0 on the grid.
std::vector<double> classes(int half, double step) {
    std::vector<double> c;
    for (int j = -half; j <= half; ++j) c.push_back(step * j);
    return c;
}

// u = c A sin(2 pi theta) / (2 pi): the straightening map has slope 1 + A cos(2 pi theta).
FoliationSurface tilted(double amplitude, std::size_t n) {
    return FoliationSurface::from_function(n, classes(10, 0.05), [amplitude](double t, double c) {
        return c * amplitude * std::sin(2 * std::numbers::pi * t) / (2 * std::numbers::pi);
    });
}

}  // namespace

TEST_CASE("standard foliation straightens to the identity") {
    const auto F = standard_foliation(256, classes(10, 0.1));
    const auto r = straighten_test(F);
    CHECK(r.verdict == Verdict::straightenable);
    CHECK(r.min_slope == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 0; i < F.n(); ++i) CHECK(F.straightened(i, 3) == doctest::Approx(i / 256.0).epsilon(1e-15));
    CHECK(r.area_residual <= 1e-12);
    CHECK(r.exact_up_to_vertical_shift);
    const auto l = lipschitz_integrability_test(F);
    CHECK(l.pass);
    CHECK(l.k == 0.0);
}

TEST_CASE("conjugated foliation straightens through the inverse conjugacy") {
    const auto f = GeneratingFamily::conjugated();
    const auto& prof = *f.conjugacy();
    const auto F = conjugated_foliation(prof, 512, classes(20, 0.05));
    CHECK(F.normalization_defect() <= 1e-15);
    CHECK(F.leaf_order_margin() > 0.0);
    const auto r = straighten_test(F);
    CHECK(r.verdict == Verdict::straightenable);
    for (std::size_t i = 0; i < F.n(); i += 7) CHECK(std::abs(F.straightened(i, 25) - prof.h_inv(i / 512.0)) <= 1e-12);
    CHECK(r.area_residual <= 1e-6);
    const auto l = lipschitz_integrability_test(F);
    CHECK(l.pass);
    CHECK(l.k > -1.0);
    CHECK(l.k < 0.0);
    // The mixed derivative is -d'(h^-1) (h^-1)', bounded by pi (beta + 2 gamma) / (1 - pi (beta + 2 gamma)).
    const double bound = std::numbers::pi * 0.15 / (1 - std::numbers::pi * 0.15);
    CHECK(l.k >= -bound);
}

TEST_CASE("triangle-wave amplitude is not straightenable at its corner") {
    for (std::size_t n : {256, 512}) {
        for (double step : {0.05, 0.025}) {
            const auto F = triangle_wave_foliation(n, classes(int(std::lround(0.5 / step)), step));
            const auto r = straighten_test(F);
            CHECK(r.verdict == Verdict::not_straightenable);
            CHECK(r.stage == "c1");
            REQUIRE(r.witness.has_value());
            CHECK(r.witness->c == 0.0);
            const auto l = lipschitz_integrability_test(F);
            CHECK_FALSE(l.pass);
            CHECK(l.stage == "c1");
        }
    }
}

TEST_CASE("smooth-wave amplitude is straightenable") {
    const auto r = straighten_test(smooth_wave_foliation(256, classes(10, 0.05)));
    CHECK(r.verdict == Verdict::straightenable);
    CHECK(r.area_residual <= 1e-6);
}

TEST_CASE("verdicts are stable under grid refinement") {
    const auto& prof = *GeneratingFamily::conjugated().conjugacy();
    for (int kind = 0; kind < 4; ++kind) {
        std::vector<Verdict> seen;
        for (std::size_t n : {128, 256, 512}) {
            const auto c = classes(int(n / 32), 16.0 / double(n));
            const FoliationSurface F = kind == 0   ? standard_foliation(n, c)
                                       : kind == 1 ? conjugated_foliation(prof, n, c)
                                       : kind == 2 ? triangle_wave_foliation(n, c)
                                                   : smooth_wave_foliation(n, c);
            seen.push_back(straighten_test(F).verdict);
        }
        CHECK(seen[0] == seen[1]);
        CHECK(seen[1] == seen[2]);
    }
}

TEST_CASE("monotonicity gray zone and folds") {
    const auto gray = straighten_test(tilted(1.0 - 0.75e-3, 256));
    CHECK(gray.verdict == Verdict::inconclusive);
    CHECK(gray.stage == "monotone");
    const auto fold = straighten_test(tilted(1.05, 256));
    CHECK(fold.verdict == Verdict::not_straightenable);
    CHECK(fold.stage == "monotone");
    REQUIRE(fold.witness.has_value());
    CHECK(std::abs(fold.witness->theta - 0.5) <= 2.0 / 256);
    CHECK(straighten_test(tilted(0.5, 256)).verdict == Verdict::straightenable);
}

TEST_CASE("area identity holds on rectangles") {
    const auto& prof = *GeneratingFamily::conjugated().conjugacy();
    CHECK(area_preservation_residual(conjugated_foliation(prof, 256, classes(10, 0.1))) <= 1e-12);
    CHECK(area_preservation_residual(smooth_wave_foliation(256, classes(10, 0.1)), 500, 9) <= 1e-12);
}

TEST_CASE("rotation normal form") {
    SUBCASE("integrable with the standard foliation") {
        const auto F = standard_foliation(256, classes(10, 0.1));
        const auto r = rotation_form_check(GeneratingFamily::integrable(), F, {2, 10, 17});
        CHECK(r.residual <= 1e-9);
        CHECK(r.pass);
        REQUIRE(r.rho.size() == 3);
        CHECK(r.rho[0] == doctest::Approx(-0.8).epsilon(1e-12));
        CHECK(r.rho[1] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.rho[2] == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("conjugated with its invariant foliation") {
        const auto f = GeneratingFamily::conjugated();
        const auto F = conjugated_foliation(*f.conjugacy(), 1024, classes(20, 0.05));
        const auto r = rotation_form_check(f, F, {5, 20, 26, 30, 38});
        CHECK(r.residual <= 1e-4);
        CHECK(r.leaf_drift <= 1e-6);
        for (std::size_t k = 0; k < r.rho.size(); ++k) {
            const double c = F.c_values()[std::vector<std::size_t>{5, 20, 26, 30, 38}[k]];
            CHECK(std::abs(r.rho[k] - c) <= 1e-4);
        }
    }
    SUBCASE("a foliation that the map does not preserve") {
        CHECK_THROWS_AS((void)rotation_form_check(GeneratingFamily::integrable(), smooth_wave_foliation(256, classes(10, 0.1)), {13}),
                        NotInvariantFoliation);
    }
}

TEST_CASE("conjugacy check") {
    const std::size_t n = 512;
    SUBCASE("integrable") {
        const auto z = GridFunction::constant(n, 0.0);
        const auto r = conjugacy_check(GeneratingFamily::integrable(), 0.3, z, z, 0.3);
        CHECK(r.residual <= 1e-8);
        CHECK(r.injective);
    }
    SUBCASE("conjugated") {
        const auto f = GeneratingFamily::conjugated();
        const auto& prof = *f.conjugacy();
        const auto F = conjugated_foliation(prof, 2 * n, classes(20, 0.05));
        for (std::size_t j : {26u, 34u}) {
            const double c = F.c_values()[j];
            const auto r = conjugacy_check(f, c, F.column(j), F.du_dc_column(j), c);
            CHECK(r.residual <= 1e-4);
            CHECK(r.injective);
            CHECK(r.excluded == 0);
            // A grid weak KAM solution carries first-order momentum error into the projected dynamics.
            SolverOptions o;
            o.n_grid = 2 * n;
            const auto w = weak_kam_solution(f, c, o);
            CHECK(conjugacy_check(f, c, w.u, F.du_dc_column(j), c).residual <= 1.0 / (2 * n));
        }
    }
    SUBCASE("standard map inside the zero plateau") {
        SelectionOptions o;
        o.solver.n_grid = n;
        const auto s = build_selection(GeneratingFamily::standard(0.9), -0.2, 0.2, 17, o);
        std::size_t checked = 0;
        for (std::size_t r = 0; r < s.rows.size(); ++r) {
            if (!s.plateau_interior[r]) continue;
            std::vector<double> du(n);
            for (std::size_t i = 0; i < n; ++i) du[i] = s.du_dc(r, i);
            const auto res = conjugacy_check(GeneratingFamily::standard(0.9), s.rows[r].c, s.rows[r].u, GridFunction(du), 0.0);
            CHECK(res.residual <= 1e-6);
            CHECK(res.excluded <= n / 16);
            ++checked;
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("surface csv round trip and validation") {
    const auto& prof = *GeneratingFamily::conjugated().conjugacy();
    const auto F = conjugated_foliation(prof, 64, classes(3, 0.2));
    std::stringstream io;
    F.write_csv(io);
    const auto G = FoliationSurface::read_csv(io);
    REQUIRE(G.n() == 64);
    REQUIRE(G.m() == 7);
    for (std::size_t j = 0; j < 7; ++j) {
        CHECK(G.c_values()[j] == F.c_values()[j]);
        for (std::size_t i = 0; i < 64; ++i) CHECK(G.value(i, j) == F.value(i, j));
    }
    std::istringstream bad_header("4,3,0,0.25,0.5,0.75,0,1\n");
    CHECK_THROWS_AS((void)FoliationSurface::read_csv(bad_header), std::invalid_argument);
    std::istringstream short_rows("3,3,0,0.3333333333333333,0.6666666666666666,0,1,2\n0,0,0\n");
    CHECK_THROWS_AS((void)FoliationSurface::read_csv(short_rows), std::invalid_argument);
    CHECK_THROWS_AS(FoliationSurface({0.0, 1.0, 0.5}, std::vector<GridFunction>(3, GridFunction::constant(8, 0.0))),
                    std::invalid_argument);
}

TEST_CASE("selection surfaces convert to foliation surfaces") {
    SelectionOptions o;
    // Coarser grids leave resonance noise at rational c that the C1 audit picks up.
    o.solver.n_grid = 1024;
    const auto s = build_selection(GeneratingFamily::conjugated(), 0.2, 0.8, 16, o);
    const auto F = FoliationSurface::from_selection(s);
    CHECK(F.n() == 1024);
    CHECK(F.m() == 16);
    CHECK(F.normalization_defect() == 0.0);
    CHECK(F.leaf_order_margin() > 0.0);
    CHECK(straighten_test(F).verdict == Verdict::straightenable);
}
