#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/weak_kam.hpp"

using namespace weakkam;

namespace {

SolverOptions grid(std::size_t n) {
    SolverOptions o;
    o.n_grid = n;
    return o;
}

// Brute-force domination violation from the raw generating function (lift scan over m).
double brute_domination(const GeneratingFamily& f, double c, double alpha, const std::vector<double>& u) {
    const std::size_t n = u.size();
    double worst = -1e300;
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) {
            const double ty = double(y) / double(n), tx = double(x) / double(n);
            double cost = 1e300;
            for (int m = -4; m <= 4; ++m) cost = std::min(cost, f.eval(ty, tx + m) + c * (ty - tx - m));
            worst = std::max(worst, u[x] - u[y] - cost - alpha);
        }
    return worst;
}

}  // namespace

TEST_CASE("integrable alpha is c^2/2 and u vanishes") {
    const auto f = GeneratingFamily::integrable();
    for (double c : {0.0, 0.5, 1.0}) {
        const auto s = solve_alpha(f, c, grid(512));
        CHECK(std::abs(s.alpha - c * c / 2) <= 1e-6);
        CHECK(s.residual <= 1e-9);
        const auto w = weak_kam_solution(f, c, grid(512));
        CHECK(w.u[0] == 0.0);
        CHECK(w.u.max() - w.u.min() <= 1e-8);
    }
}

TEST_CASE("conjugated alpha and weak KAM solution match the closed form") {
    const auto f = GeneratingFamily::conjugated();
    const auto& prof = *f.conjugacy();
    for (double c : {0.3, 0.7, 1.1}) {
        const auto w = weak_kam_solution(f, c, grid(1024));
        CHECK(std::abs(w.alpha - c * c / 2) <= 1e-4);
        double err = 0.0;
        for (std::size_t i = 0; i < w.u.size(); ++i) {
            const double t = w.u.node(i);
            const double expected = -c * (prof.d(prof.h_inv(t)) - prof.d(prof.h_inv(0.0)));
            err = std::max(err, std::abs(w.u[i] - expected));
        }
        CHECK(err <= 5e-4);
        CHECK(w.residual <= 1e-8);
        CHECK(w.domination_violation <= first_order_slack(1024));
    }
}

TEST_CASE("standard map alpha at c = 0 equals minus the fixed-point action") {
    const auto f = GeneratingFamily::standard(0.9);
    const auto w = weak_kam_solution(f, 0.0, grid(1024));
    CHECK(w.residual <= 1e-8);
    CHECK(std::abs(w.alpha - 0.9 / (4 * std::numbers::pi * std::numbers::pi)) <= 1e-6);
    CHECK(w.u[0] == 0.0);
}

TEST_CASE("solution rows pass a brute-force domination scan") {
    const auto f = GeneratingFamily::standard(0.9);
    for (double c : {-0.4, 0.35}) {
        const auto w = weak_kam_solution(f, c, grid(128));
        CHECK(brute_domination(f, c, w.alpha, w.u.values) <= first_order_slack(128));
        CHECK(check_dominated(w.u, f, c, w.alpha) <= first_order_slack(128));
    }
}

TEST_CASE("check_dominated examples") {
    const auto f = GeneratingFamily::integrable();
    CHECK(check_dominated(GridFunction::constant(256, 0.0), f, 1.0, 0.5) <= first_order_slack(256));
    std::vector<double> wave(256);
    for (std::size_t i = 0; i < wave.size(); ++i) wave[i] = 10 * std::sin(2 * std::numbers::pi * double(i) / 256);
    CHECK(check_dominated(GridFunction(wave), f, 0.0, 0.0) > 1.0);
}

TEST_CASE("fixed point residual of a perturbed solution grows") {
    const auto f = GeneratingFamily::conjugated();
    const auto s = solve_alpha(f, 0.3, grid(256));
    CHECK(fixed_point_residual(s.u, *s.cost, s.alpha) <= 1e-9);
    CHECK(fixed_point_residual(s.u, *s.cost, s.alpha + 1e-3) == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("alpha is convex and rho is monotone on a c-grid") {
    const auto f = GeneratingFamily::standard(0.9);
    std::vector<double> alpha;
    for (int k = -8; k <= 8; ++k) alpha.push_back(solve_alpha(f, 0.1 * k, grid(256)).alpha);
    for (std::size_t i = 1; i + 1 < alpha.size(); ++i) CHECK(alpha[i + 1] - 2 * alpha[i] + alpha[i - 1] >= -1e-6);
    double prev = -1e9;
    for (int k = -4; k <= 4; ++k) {
        const double r = rho_of_c(f, 0.2 * k, RhoMethod::alpha_derivative, grid(256));
        CHECK(r >= prev - 1e-6);
        prev = r;
    }
}

TEST_CASE("solutions are equi-semi-concave on a compact c-range") {
    const auto f = GeneratingFamily::standard(0.9);
    double worst = 0.0;
    for (double c : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const auto w = weak_kam_solution(f, c, grid(256));
        const std::size_t n = w.u.size();
        for (std::size_t i = 0; i < n; ++i) {
            const double d2 = (w.u[(i + 1) % n] - 2 * w.u[i] + w.u[(i + n - 1) % n]) * double(n * n);
            worst = std::max(worst, d2);
        }
    }
    CHECK(worst <= f.semiconcavity_bound(3.0) + 1e-6);
}

TEST_CASE("rotation number estimates") {
    SUBCASE("integrable") {
        const auto f = GeneratingFamily::integrable();
        // Grid alpha is piecewise linear with slopes k / n: the derivative is exact only at grid-aligned c.
        for (double c : {0.25, 0.6}) {
            const auto r = rotation_number(f, c, grid(512));
            CHECK(std::abs(r.from_orbit - c) <= 1e-6);
            CHECK(std::abs(r.from_alpha - c) <= (c * 512 == std::round(c * 512) ? 1e-6 : 1.0 / 512));
        }
    }
    SUBCASE("conjugated") {
        const auto f = GeneratingFamily::conjugated();
        for (double c : {0.3, 1.0 / std::numbers::sqrt2}) {
            const auto r = rotation_number(f, c, grid(1024));
            CHECK(std::abs(r.from_alpha - c) <= 1e-4);
            CHECK(std::abs(r.from_orbit - r.from_alpha) <= 5e-3);
        }
    }
    SUBCASE("standard map plateau at zero") {
        const auto f = GeneratingFamily::standard(0.9);
        CHECK(std::abs(rho_of_c(f, 0.0, RhoMethod::alpha_derivative, grid(1024))) <= 1e-6);
        CHECK(std::abs(rho_of_c(f, 0.0, RhoMethod::orbit, grid(1024))) <= 1e-6);
    }
}

TEST_CASE("disagreeing estimators raise MethodDisagreement") {
    const auto f = GeneratingFamily::conjugated();
    RhoOptions strict;
    strict.agreement = 1e-12;
    CHECK_THROWS_AS((void)rotation_number(f, 0.3, grid(256), strict), MethodDisagreement);
}

TEST_CASE("value iteration budget exhaustion raises NoConvergence with a bracket") {
    auto o = grid(256);
    o.max_iters = 1;
    o.warm_iters = 1;
    try {
        (void)solve_alpha(GeneratingFamily::standard(0.9), 0.37, o);
        FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
        CHECK(e.alpha_low <= e.alpha_high);
    }
}

TEST_CASE("discounted fixed point at lambda = 0 is one Lax-Oleinik step") {
    const auto f = GeneratingFamily::standard(0.9);
    const auto A = project_cost(f, 0.2, 128);
    const double shift = 0.123;
    const GridFunction u = discounted_fixed_point(A, 0.0, shift);
    for (std::size_t x = 0; x < A.size(); ++x) {
        double best = 1e300;
        for (std::size_t y = 0; y < A.size(); ++y) best = std::min(best, A(y, x) + shift);
        CHECK(u[x] == best);
    }
}

TEST_CASE("discounted fixed points solve their contraction") {
    const auto f = GeneratingFamily::conjugated();
    const auto A = project_cost(f, 0.4, 128);
    for (double lambda : {0.5, 0.9, 0.999}) {
        const GridFunction u = discounted_fixed_point(A, lambda, 0.08);
        double res = 0.0;
        for (std::size_t x = 0; x < A.size(); ++x) {
            double best = 1e300;
            for (std::size_t y = 0; y < A.size(); ++y) best = std::min(best, lambda * u[y] + A(y, x) + 0.08);
            res = std::max(res, std::abs(best - u[x]));
        }
        CHECK(res <= 1e-9);
    }
}

TEST_CASE("discounted solution closed forms") {
    SUBCASE("integrable irrational class") {
        const auto s = discounted_solution(GeneratingFamily::integrable(), 1.0 / std::numbers::sqrt2,
                                           DiscountOptions{{}, grid(512)});
        CHECK(std::max(std::abs(s.limit.max()), std::abs(s.limit.min())) <= 1e-6);
        CHECK(s.mather_check_passed);
    }
    SUBCASE("conjugated irrational class") {
        const auto f = GeneratingFamily::conjugated();
        const auto& prof = *f.conjugacy();
        const double c = 1.0 / std::numbers::sqrt2;
        const auto s = discounted_solution(f, c, DiscountOptions{{}, grid(1024)});
        double err = 0.0;
        for (std::size_t i = 0; i < s.limit.size(); ++i) {
            const double t = s.limit.node(i);
            err = std::max(err, std::abs(s.limit[i] - c * (prof.mean_d() - prof.d(prof.h_inv(t)))));
        }
        CHECK(err <= 1e-3);
        CHECK(s.limit[0] == doctest::Approx(0.0353553).epsilon(1e-3));
        CHECK(s.mather_integral <= first_order_slack(1024));
    }
}

TEST_CASE("rational_fit picks the convergent and detects ambiguity") {
    const auto a = rational_fit(1.0 / 3.0 + 1e-9, 8, 1e-6);
    REQUIRE(a.has_value());
    CHECK(a->first == 1);
    CHECK(a->second == 3);
    CHECK_FALSE(rational_fit(1.0 / std::numbers::sqrt2, 8, 1e-6).has_value());
    const auto zero = rational_fit(-2e-7, 8, 1e-6);
    REQUIRE(zero.has_value());
    CHECK(zero->first == 0);
    CHECK_THROWS_AS((void)rational_fit(0.5, 8, 0.2), PlateauDetectionAmbiguous);
}

TEST_CASE("integrable and conjugated selection surfaces have no plateaus") {
    SelectionOptions o;
    o.solver = grid(256);
    const auto flat = build_selection(GeneratingFamily::integrable(), 0.11, 0.89, 16, o);
    CHECK(flat.plateaus.empty());
    for (const auto& row : flat.rows) CHECK(row.u.max() - row.u.min() <= 1e-8);

    const auto f = GeneratingFamily::conjugated();
    const auto& prof = *f.conjugacy();
    const auto s = build_selection(f, 0.11, 0.89, 16, o);
    CHECK(s.plateaus.empty());
    double err = 0.0;
    for (const auto& row : s.rows)
        for (std::size_t i = 0; i < row.u.size(); ++i) {
            const double t = row.u.node(i);
            err = std::max(err, std::abs(row.u[i] + row.c * (prof.d(prof.h_inv(t)) - prof.d(prof.h_inv(0.0)))));
        }
    CHECK(err <= 5e-4);
}

TEST_CASE("standard map selection across the zero plateau") {
    SelectionOptions o;
    o.solver = grid(256);
    const auto s = build_selection(GeneratingFamily::standard(0.9), -0.3, 0.3, 25, o);
    REQUIRE(s.plateaus.size() >= 1);
    bool found = false;
    for (const auto& p : s.plateaus)
        if (p.p == 0 && p.q == 1) {
            found = true;
            CHECK(p.a2 > p.a1);
            CHECK(p.a1 < 0.0);
            CHECK(p.a2 > 0.0);
        }
    CHECK(found);
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
        CHECK(s.rows[r].u[0] == 0.0);
        CHECK(s.rows[r].residual <= 1e-6);
        CHECK(s.rows[r].domination_violation <= first_order_slack(256));
    }

    std::ostringstream csv, json;
    s.write_csv(csv);
    s.write_summary_json(json);
    CHECK(csv.str().rfind("c,theta,u,du_dtheta,du_dc\n", 0) == 0);
    const auto j = nlohmann::json::parse(json.str());
    CHECK(j.contains("plateaus"));
}
