#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "weakkam/errors.hpp"
#include "weakkam/twist_map.hpp"

using namespace weakkam;

namespace {

// Independent model of the conjugated family: F = H o F0 o H^-1 with H(x, r) = (h(x), r / h'(x)).
struct CompositionOracle {
    double beta = 0.05, gamma = 0.05;
    double d(double t) const {
        return beta * std::pow(std::sin(std::numbers::pi * t), 2) +
               gamma * std::pow(std::sin(2 * std::numbers::pi * t), 2);
    }
    double h(double t) const { return t + d(t); }
    double hp(double t) const {
        const double e = 1e-6;
        return (h(t + e) - h(t - e)) / (2 * e) ;
    }
    double h_inv(double t) const {
        double lo = t - 1.0, hi = t + 1.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (h(mid) < t ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    LiftPoint forward(LiftPoint p) const {
        const double x = h_inv(p.theta);
        const double r0 = p.r * hp(x);
        const double x1 = x + r0;
        return {h(x1), r0 / hp(x1)};
    }
};

std::vector<GeneratingFamily> builtins() {
    return {GeneratingFamily::integrable(), GeneratingFamily::standard(0.9),
            GeneratingFamily::conjugated()};
}

}  // namespace

TEST_CASE("integrable map is the shear") {
    const auto f = GeneratingFamily::integrable();
    const MapPoint q = forward_map(f, {0.25, 0.5});
    CHECK(q.theta == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(q.r == doctest::Approx(0.5).epsilon(1e-14));
    for (double theta : {0.0, 0.1, 0.37, 0.99}) {
        const MapPoint z = forward_map(f, {theta, 0.0});
        CHECK(std::abs(circle_offset(z.theta - theta)) < 1e-14);
        CHECK(std::abs(z.r) < 1e-14);
    }
    const MapPoint back = inverse_map(f, {0.75, 0.5});
    CHECK(back.theta == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(back.r == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("standard map closed-form update") {
    const double k = 0.9;
    const auto f = GeneratingFamily::standard(k);
    const double kick = k / (2 * std::numbers::pi) * std::sin(2 * std::numbers::pi * 0.25);
    const double theta_oracle = 0.25 + 0.1 + kick;
    const double r_oracle = 0.1 + kick;
    // Frozen values of the closed-form update.
    CHECK(theta_oracle == doctest::Approx(0.4932394487827058).epsilon(1e-15));
    CHECK(r_oracle == doctest::Approx(0.2432394487827058).epsilon(1e-15));
    const MapPoint q = forward_map(f, {0.25, 0.1});
    CHECK(std::abs(q.theta - theta_oracle) < 1e-12);
    CHECK(std::abs(q.r - r_oracle) < 1e-12);
    const MapPoint back = inverse_map(f, q);
    CHECK(std::abs(back.theta - 0.25) < 1e-12);
    CHECK(std::abs(back.r - 0.1) < 1e-12);
}

TEST_CASE("conjugated map matches the composition oracle") {
    const auto f = GeneratingFamily::conjugated();
    const CompositionOracle oracle;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(0, 1), momentum(-2, 2);
    for (int s = 0; s < 100; ++s) {
        const LiftPoint p{angle(rng), momentum(rng)};
        const LiftPoint a = forward_lift(f, p);
        const LiftPoint b = oracle.forward(p);
        CHECK(std::abs(a.theta - b.theta) < 1e-9);
        CHECK(std::abs(a.r - b.r) < 1e-8);  // oracle derivative is a finite difference
    }
}

TEST_CASE("map relations hold to 1e-10") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> angle(0, 1), momentum(-3, 3);
    for (const auto& f : builtins()) {
        for (int s = 0; s < 50; ++s) {
            const LiftPoint p{angle(rng), momentum(rng)};
            const LiftPoint q = forward_lift(f, p);
            CHECK(std::abs(-f.d1(p.theta, q.theta) - p.r) < 1e-10);
            CHECK(std::abs(f.d2(p.theta, q.theta) - q.r) < 1e-10);
        }
    }
}

TEST_CASE("inverse undoes forward on random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(0, 1), momentum(-3, 3);
    for (const auto& f : builtins()) {
        double sup = 0.0;
        for (int s = 0; s < 100; ++s) {
            const MapPoint p{angle(rng), momentum(rng)};
            const MapPoint back = inverse_map(f, forward_map(f, p));
            sup = std::max({sup, std::abs(circle_offset(back.theta - p.theta)), std::abs(back.r - p.r)});
            const MapPoint fwd = forward_map(f, inverse_map(f, p));
            sup = std::max({sup, std::abs(circle_offset(fwd.theta - p.theta)), std::abs(fwd.r - p.r)});
        }
        CHECK(sup <= 1e-8);
    }
}

TEST_CASE("tangent map is symplectic with positive twist entry") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> angle(0, 1), momentum(-3, 3);
    for (const auto& f : builtins()) {
        for (int s = 0; s < 1000; ++s) {
            const MapPoint p{angle(rng), momentum(rng)};
            const TangentMatrix m = tangent_map(f, p);
            CHECK(std::abs(m.det() - 1.0) <= 1e-9);
            CHECK(m.b > 0.0);
        }
    }
    const TangentMatrix id = tangent_map(GeneratingFamily::integrable(), {0.3, 0.7});
    CHECK(id.a == 1.0);
    CHECK(id.b == 1.0);
    CHECK(id.c == 0.0);
    CHECK(id.d == 1.0);
}

TEST_CASE("conjugated torsion on the fixed circle") {
    const auto f = GeneratingFamily::conjugated();
    const CompositionOracle oracle;
    for (double theta : {0.0, 0.13, 0.5, 0.77}) {
        const double x = oracle.h_inv(theta);
        const double expected = oracle.hp(x) * oracle.hp(x);
        CHECK(std::abs(tangent_map(f, {theta, 0.0}).b - expected) < 1e-8);
    }
}

TEST_CASE("generating functions are periodic, twist and superlinear") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> angle(0, 1), jump(-3, 3);
    for (const auto& f : builtins()) {
        for (int s = 0; s < 1000; ++s) {
            const double t = angle(rng);
            const double T = t + jump(rng);
            CHECK(std::abs(f.eval(t + 1, T + 1) - f.eval(t, T)) <= 1e-12);
            CHECK(f.d12(t, T) < 0.0);
            CHECK(f.d12(t, T) <= f.twist_upper_bound() + 1e-12);
        }
        for (double t : {0.0, 0.3, 0.8})
            for (double span : {-60.0, 60.0}) CHECK(f.eval(t, t + span) / std::abs(span) > 20.0);
    }
}

TEST_CASE("iterated twist audit") {
    CHECK(iterate_twist_check(GeneratingFamily::integrable(), 5, 100).clean());
    CHECK(iterate_twist_check(GeneratingFamily::conjugated(), 3, 200).clean());
    // Allowed to flag points; must simply report.
    const auto report = iterate_twist_check(GeneratingFamily::standard(0.9), 2, 200);
    CHECK(report.samples == 200);
    CHECK(report.violations.size() <= 200);
}

TEST_CASE("family tokens") {
    CHECK(GeneratingFamily::parse("integrable").kind() == FamilyKind::integrable);
    const auto s = GeneratingFamily::parse("standard:k=0.9");
    CHECK(s.kind() == FamilyKind::standard);
    CHECK(s.coupling() == 0.9);
    const auto c = GeneratingFamily::parse("conjugated:beta=0.05,gamma=0.05");
    REQUIRE(c.conjugacy() != nullptr);
    CHECK(c.conjugacy()->beta() == 0.05);
    CHECK(GeneratingFamily::parse(s.token()).coupling() == 0.9);
    CHECK_THROWS_AS((void)GeneratingFamily::parse("pendulum"), std::invalid_argument);
    CHECK_THROWS_AS((void)GeneratingFamily::parse("standard:q=1"), std::invalid_argument);
    CHECK_THROWS_AS((void)GeneratingFamily::parse("standard:k=abc"), std::invalid_argument);
    CHECK_THROWS_AS((void)GeneratingFamily::parse("conjugated:gamma=0"), std::invalid_argument);
}

TEST_CASE("broken twist is detected by the solver") {
    const auto f = GeneratingFamily::parse("integrable:kinetic=-1");
    CHECK_THROWS_AS((void)forward_map(f, {0.2, 0.3}), NonMonotone);
}

TEST_CASE("conjugacy profile constants") {
    const ConjugacyProfile p(0.05, 0.05);
    CHECK(p.mean_d() == doctest::Approx(0.05));
    CHECK(p.d(0.5) == doctest::Approx(0.05));
    // Gap constant: mean(d) - d(1/2)/2.
    CHECK(p.mean_d() - p.d(0.5) / 2 == doctest::Approx(0.025));
    for (double t : {-1.3, 0.0, 0.2, 0.5, 0.9, 2.4}) CHECK(std::abs(p.h(p.h_inv(t)) - t) < 1e-13);
    CHECK(p.discounted_irrational(1 / std::sqrt(2.0), 0.0) == doctest::Approx(0.0353553390593).epsilon(1e-10));
}
