#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "weakkam/minplus.hpp"
#include "weakkam/pseudograph.hpp"
#include "weakkam/twist_map.hpp"

namespace weakkam {

// Slopes dr/dtheta of the vertical pushed forward (k > 0) or pulled back (k < 0) along an orbit.
struct GreenSlopeSequence {
    MapPoint base;
    int n_max = 0;
    std::vector<double> forward;   // s(k) for k = 1..n_max at index k - 1
    std::vector<double> backward;  // s(-k) for k = 1..n_max at index k - 1
    double s_plus = 0.0;           // s(n_max)
    double s_minus = 0.0;          // s(-n_max)
    // s(k) - s(k + 1) and s(-k - 1) - s(-k) for k = 1..n_max-1, from the area identity (no cancellation).
    std::vector<double> forward_gaps;
    std::vector<double> backward_gaps;

    [[nodiscard]] double slope(int k) const;
    // s(n_max) - s(-n_max): the only error estimate for the limiting slopes.
    [[nodiscard]] double bracket_width() const { return s_plus - s_minus; }
    // min over 1 <= n < n_max of the gaps in s(-n) < s(-n-1) < s(n+1) < s(n).
    [[nodiscard]] double nesting_margin() const;
    [[nodiscard]] bool nested(double tolerance = 0.0) const { return nesting_margin() > tolerance; }
};

// Throws OrbitEscape if |r| leaves the family's validated band and SlopeBlowup if an image is vertical.
[[nodiscard]] GreenSlopeSequence green_slopes(const GeneratingFamily& family, MapPoint base, int n_max);

// b-entry of the q-fold tangent map along the leaf r = leaf(theta) at every node.
// Throws NotInvariant if the leaf is not mapped into itself within 8/n, NonPositiveTorsion if some s_q <= 0.
[[nodiscard]] GridFunction torsion_along_leaf(const GeneratingFamily& family, const GridFunction& leaf, int q);

struct LeafDensity {
    GridFunction torsion;
    GridFunction density;     // proportional to 1/sqrt(torsion), integral 1
    GridFunction conjugacy;   // cumulative integral of the density from 0
    double inverse_sqrt_integral = 0.0;  // periodic trapezoid of 1/sqrt(torsion)

    // Lifted conjugacy at any theta (linear between nodes, + integer part).
    [[nodiscard]] double conjugacy_at(double theta) const;
    void write_csv(std::ostream& out) const;
};

[[nodiscard]] LeafDensity rational_leaf_density(const GeneratingFamily& family, const GridFunction& leaf, int q);

// sup over nodes of the circle distance between conj(g(theta)) and conj(theta) + rho.
[[nodiscard]] double density_conjugacy_residual(const LeafDensity& density, const CircleMap& g, double rho);

}  // namespace weakkam
