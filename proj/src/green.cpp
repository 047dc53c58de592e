#include "weakkam/green.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "weakkam/errors.hpp"
#include "weakkam/io.hpp"
#include "weakkam/parallel.hpp"

namespace weakkam {

namespace {

void check_band(const GeneratingFamily& family, const MapPoint& p, int index) {
    if (!(std::abs(p.r) <= family.band_r())) throw OrbitEscape(index, p.r);
}

// Slope of v after normalization; throws if the theta component vanishes.
double slope_of(std::array<double, 2> v, int index) {
    if (!(std::abs(v[0]) > 1e-14 * std::abs(v[1]))) throw SlopeBlowup(index);
    return v[1] / v[0];
}

std::array<double, 2> normalized(std::array<double, 2> v) {
    const double norm = std::hypot(v[0], v[1]);
    return {v[0] / norm, v[1] / norm};
}

}  // namespace

double GreenSlopeSequence::slope(int k) const {
    if (k == 0 || std::abs(k) > n_max) throw std::out_of_range("GreenSlopeSequence: index out of range");
    return k > 0 ? forward[static_cast<std::size_t>(k - 1)] : backward[static_cast<std::size_t>(-k - 1)];
}

double GreenSlopeSequence::nesting_margin() const {
    double margin = std::numeric_limits<double>::infinity();
    for (int n = 1; n < n_max; ++n) {
        const auto k = static_cast<std::size_t>(n - 1);
        margin = std::min({margin, backward_gaps[k], slope(n + 1) - slope(-n - 1), forward_gaps[k]});
    }
    return margin;
}

namespace {

// Unit direction of a product of tangent matrices applied to the vertical, with its norm and determinant.
struct PushedVertical {
    std::array<double, 2> dir{0.0, 1.0};
    double norm = 1.0;
    double det = 1.0;
};

// Gap between the slopes of M e2 and M T e2: det(M) * cross(e2, T e2) / (x-components), without cancellation.
double slope_gap(const PushedVertical& v, const PushedVertical& w, double cross) {
    return v.det * cross / (v.norm * w.norm * v.dir[0] * w.dir[0]);
}

}  // namespace

GreenSlopeSequence green_slopes(const GeneratingFamily& family, MapPoint base, int n_max) {
    if (n_max < 1) throw std::invalid_argument("green_slopes: n_max must be >= 1");
    GreenSlopeSequence seq;
    seq.base = base;
    seq.n_max = n_max;
    check_band(family, base, 0);
    const auto nm = static_cast<std::size_t>(n_max);
    // Backward orbit x_{-1}, ..., x_{-n_max} and forward orbit x_1, ..., x_{n_max}.
    std::vector<MapPoint> past(nm + 1), future(nm + 1);
    past[0] = future[0] = base;
    for (std::size_t k = 1; k <= nm; ++k) {
        past[k] = inverse_map(family, past[k - 1]);
        check_band(family, past[k], -static_cast<int>(k));
        future[k] = forward_map(family, future[k - 1]);
        check_band(family, future[k], static_cast<int>(k));
    }
    std::vector<TangentMatrix> back_tangent(nm + 1), fwd_tangent(nm + 1);
    for (std::size_t k = 0; k <= nm; ++k) {
        back_tangent[k] = tangent_map(family, past[k]);
        fwd_tangent[k] = tangent_map(family, future[k]);
    }
    const auto push = [](PushedVertical v, const TangentMatrix& m) {
        const auto image = m.apply(v.dir);
        const double norm = std::hypot(image[0], image[1]);
        v.dir = {image[0] / norm, image[1] / norm};
        v.norm *= norm;
        return v;
    };
    // s(k): vertical at x_{-k} pushed forward k steps.
    std::vector<PushedVertical> fwd(nm + 1), bwd(nm + 1);
    for (std::size_t k = 1; k <= nm; ++k) {
        PushedVertical v;
        for (std::size_t j = k; j >= 1; --j) {
            v = push(v, back_tangent[j]);
            v.det *= back_tangent[j].det();
        }
        fwd[k] = v;
        seq.forward.push_back(slope_of(v.dir, static_cast<int>(k)));
    }
    // s(-k): vertical at x_k pulled back k steps.
    for (std::size_t k = 1; k <= nm; ++k) {
        PushedVertical v;
        for (std::size_t j = k; j-- > 0;) {
            v = push(v, fwd_tangent[j].inverse());
            v.det /= fwd_tangent[j].det();
        }
        bwd[k] = v;
        seq.backward.push_back(slope_of(v.dir, -static_cast<int>(k)));
    }
    for (std::size_t k = 1; k < nm; ++k) {
        seq.forward_gaps.push_back(slope_gap(fwd[k], fwd[k + 1], back_tangent[k + 1].b));
        const TangentMatrix& t = fwd_tangent[k];
        seq.backward_gaps.push_back(slope_gap(bwd[k], bwd[k + 1], t.b / t.det()));
    }
    seq.s_plus = seq.forward.back();
    seq.s_minus = seq.backward.back();
    return seq;
}

GridFunction torsion_along_leaf(const GeneratingFamily& family, const GridFunction& leaf, int q) {
    if (q < 1) throw std::invalid_argument("torsion_along_leaf: q must be >= 1");
    const std::size_t n = leaf.size();
    const double invariance_tol = corner_threshold(n);
    std::vector<double> torsion(n), defect(n);
    parallel_for(n, [&](std::size_t i) {
        MapPoint x{leaf.node(i), leaf[i]};
        const MapPoint image = forward_map(family, x);
        defect[i] = std::abs(image.r - leaf.at(image.theta));
        // The vertical is the second basis vector and the leaf tangent has unit theta component,
        // so the b-entry is the same in both bases.
        TangentMatrix m = tangent_map(family, x);
        for (int k = 1; k < q; ++k) {
            x = forward_map(family, x);
            m = tangent_map(family, x) * m;
        }
        torsion[i] = m.b;
    });
    for (std::size_t i = 0; i < n; ++i)
        if (defect[i] > invariance_tol) throw NotInvariant(i, defect[i]);
    for (std::size_t i = 0; i < n; ++i)
        if (!(torsion[i] > 0.0)) throw NonPositiveTorsion(i, torsion[i]);
    return GridFunction(std::move(torsion));
}

double LeafDensity::conjugacy_at(double theta) const {
    // Nodal values on [0, 1) close with value 1 at theta = 1 (the density integrates to 1).
    const std::size_t n = conjugacy.size();
    const double base = std::floor(theta);
    const double x = (theta - base) * static_cast<double>(n);
    const auto i = std::min(static_cast<std::size_t>(x), n - 1);
    const double frac = x - static_cast<double>(i);
    const double next = i + 1 < n ? conjugacy[i + 1] : 1.0;
    return base + (1.0 - frac) * conjugacy[i] + frac * next;
}

void LeafDensity::write_csv(std::ostream& out) const {
    out << "theta,torsion,density,conjugacy\n";
    for (std::size_t i = 0; i < density.size(); ++i) {
        const double row[] = {density.node(i), torsion[i], density[i], conjugacy[i]};
        write_csv_row(out, row);
    }
}

LeafDensity rational_leaf_density(const GeneratingFamily& family, const GridFunction& leaf, int q) {
    LeafDensity out;
    out.torsion = torsion_along_leaf(family, leaf, q);
    const std::size_t n = leaf.size();
    std::vector<double> inv(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        inv[i] = 1.0 / std::sqrt(out.torsion[i]);
        total += inv[i];
    }
    out.inverse_sqrt_integral = total / static_cast<double>(n);
    std::vector<double> density(n), cumulative(n);
    for (std::size_t i = 0; i < n; ++i) density[i] = inv[i] / out.inverse_sqrt_integral;
    cumulative[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        cumulative[i] = cumulative[i - 1] + 0.5 * (density[i - 1] + density[i]) / static_cast<double>(n);
    out.density = GridFunction(std::move(density));
    out.conjugacy = GridFunction(std::move(cumulative));
    return out;
}

double density_conjugacy_residual(const LeafDensity& density, const CircleMap& g, double rho) {
    const std::size_t n = density.conjugacy.size();
    if (g.size() != n) throw std::invalid_argument("density_conjugacy_residual: grid mismatch");
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lhs = density.conjugacy_at(g.node_image(i));
        sup = std::max(sup, std::abs(circle_offset(lhs - density.conjugacy[i] - rho)));
    }
    return sup;
}

}  // namespace weakkam
