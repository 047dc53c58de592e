#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace weakkam {

// Point of the annulus with the angle reduced to [0, 1).
struct MapPoint {
    double theta = 0.0;
    double r = 0.0;
};

// Point of the universal cover; theta is a lift.
struct LiftPoint {
    double theta = 0.0;
    double r = 0.0;
};

// Jacobian [[a, b], [c, d]] acting on (dtheta, dr).
struct TangentMatrix {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

    [[nodiscard]] double det() const { return a * d - b * c; }
    [[nodiscard]] TangentMatrix inverse() const;
    [[nodiscard]] std::array<double, 2> apply(std::array<double, 2> v) const;
    friend TangentMatrix operator*(const TangentMatrix& x, const TangentMatrix& y);
};

enum class FamilyKind { integrable, standard, conjugated };

// Closed-form model data of the conjugated family: the circle diffeomorphism h = id + d.
class ConjugacyProfile {
public:
    ConjugacyProfile(double beta, double gamma);

    [[nodiscard]] double beta() const { return beta_; }
    [[nodiscard]] double gamma() const { return gamma_; }

    [[nodiscard]] double d(double t) const;
    [[nodiscard]] double d_prime(double t) const;
    [[nodiscard]] double d_second(double t) const;
    [[nodiscard]] double h(double t) const { return t + d(t); }
    [[nodiscard]] double h_prime(double t) const { return 1.0 + d_prime(t); }
    // Inverse of h on the line, by bisection to 1e-14.
    [[nodiscard]] double h_inv(double t) const;
    [[nodiscard]] double h_inv_prime(double t) const;
    [[nodiscard]] double h_inv_second(double t) const;
    // Mean of d over the circle.
    [[nodiscard]] double mean_d() const { return 0.5 * (beta_ + gamma_); }

    // Reference weak KAM solution normalized at 0 and the invariant leaf.
    [[nodiscard]] double weak_kam(double c, double theta) const;
    [[nodiscard]] double leaf(double c, double theta) const;
    // Vanishing-discount limit at an irrational class.
    [[nodiscard]] double discounted_irrational(double c, double theta) const;

private:
    double beta_;
    double gamma_;
};

// Twist generating function S(theta, Theta) together with its partial derivatives.
// Immutable and cheap to copy.
class GeneratingFamily {
public:
    // `kinetic` scales the quadratic part; a non-positive value breaks the twist on purpose.
    static GeneratingFamily integrable(double kinetic = 1.0);
    static GeneratingFamily standard(double k, double kinetic = 1.0);
    static GeneratingFamily conjugated(double beta = 0.05, double gamma = 0.05,
                                       double kinetic = 1.0);
    // Token forms: integrable | standard:k=0.9 | conjugated:beta=0.05,gamma=0.05
    // Every family also accepts kinetic=<scale>.
    static GeneratingFamily parse(std::string_view token);

    [[nodiscard]] const std::string& id() const;
    [[nodiscard]] FamilyKind kind() const;
    [[nodiscard]] std::string token() const;

    [[nodiscard]] double eval(double t, double T) const;
    [[nodiscard]] double d1(double t, double T) const;
    [[nodiscard]] double d2(double t, double T) const;
    [[nodiscard]] double d11(double t, double T) const;
    [[nodiscard]] double d12(double t, double T) const;
    [[nodiscard]] double d22(double t, double T) const;

    // Validated band |r| <= band_r() on which the twist sign is certified.
    [[nodiscard]] double band_r() const;
    // Half width of the root bracket around theta (superlinearity window).
    [[nodiscard]] double root_window() const;
    // Sup of d12 over the band: strictly negative for a twist map.
    [[nodiscard]] double twist_upper_bound() const;
    // Sup of d22 over pairs with |Theta - theta| <= span; bounds the semi-concavity of T u.
    [[nodiscard]] double semiconcavity_bound(double span) const;

    // Present for the conjugated family only.
    [[nodiscard]] const ConjugacyProfile* conjugacy() const;
    // Standard-map coupling (0 for other families).
    [[nodiscard]] double coupling() const;
    [[nodiscard]] double kinetic() const;

    // Fast evaluator of S(i/n, j/n + m) on a uniform grid (tables built once).
    class GridKernel {
    public:
        [[nodiscard]] double operator()(std::size_t i, std::size_t j, int m) const;
        [[nodiscard]] std::size_t size() const { return n_; }

    private:
        friend class GeneratingFamily;
        FamilyKind kind_ = FamilyKind::integrable;
        std::size_t n_ = 0;
        double kinetic_ = 1.0;
        std::vector<double> node_;     // lifted coordinate of node j in the kinetic variable
        std::vector<double> potential_;  // additive term depending on the first argument
    };
    [[nodiscard]] GridKernel grid_kernel(std::size_t n) const;

    struct Model;

private:
    explicit GeneratingFamily(std::shared_ptr<const Model> model);
    std::shared_ptr<const Model> model_;
};

// Map relations r = -d1 S, R = d2 S solved by bracketed Newton with a bisection fallback.
[[nodiscard]] LiftPoint forward_lift(const GeneratingFamily& family, LiftPoint p);
[[nodiscard]] LiftPoint inverse_lift(const GeneratingFamily& family, LiftPoint p);
[[nodiscard]] MapPoint forward_map(const GeneratingFamily& family, MapPoint p);
[[nodiscard]] MapPoint inverse_map(const GeneratingFamily& family, MapPoint p);
[[nodiscard]] TangentMatrix tangent_map(const GeneratingFamily& family, MapPoint p);

struct TwistViolation {
    MapPoint point;
    double derivative;  // d(pi_1 F^n)/dr, expected positive
};

struct TwistCheckReport {
    int iterates = 0;
    std::size_t samples = 0;
    std::vector<TwistViolation> violations;
    [[nodiscard]] bool clean() const { return violations.empty(); }
};

// Finite-difference audit of the twist of F^n on random points of the band.
[[nodiscard]] TwistCheckReport iterate_twist_check(const GeneratingFamily& family, int n,
                                                   std::size_t samples, unsigned seed = 1);

[[nodiscard]] inline double wrap01(double x) {
    const double y = x - std::floor(x);
    return y >= 1.0 ? 0.0 : y;
}

// Signed representative of x mod 1 in [-1/2, 1/2).
[[nodiscard]] double circle_offset(double x);

}  // namespace weakkam
