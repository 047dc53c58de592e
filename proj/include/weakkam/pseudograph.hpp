#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "weakkam/minplus.hpp"
#include "weakkam/twist_map.hpp"

namespace weakkam {

// Closed momentum interval [lower, upper] above one grid node.
struct NodeInterval {
    double lower = 0.0;
    double upper = 0.0;
    [[nodiscard]] double width() const { return upper - lower; }
    [[nodiscard]] double mid() const { return 0.5 * (lower + upper); }
};

// Interval width above which a node counts as a genuine corner: 8 / n.
[[nodiscard]] inline double corner_threshold(std::size_t n) { return 8.0 / static_cast<double>(n); }

// One-sided slopes at every node: upper = slope from the left, lower = slope from the right;
// nodes where the left slope is below the right slope collapse to their average.
// Each interval is certified against u(y) - u(x) - p (y - x) <= K/2 (y - x)^2 on all grid pairs,
// with K from u.semiconcavity_K or, if absent, the largest positive second difference.
// Throws NotSemiConcave if no p satisfies the inequality within 4/n at some node.
[[nodiscard]] std::vector<NodeInterval> super_differential(const GridFunction& u);

// Full pseudograph of c + u' as an essential closed polyline in the annulus.
class Pseudograph {
public:
    Pseudograph() = default;
    Pseudograph(double c, std::vector<NodeInterval> nodes);

    // Graph of given momentum values r_i above the nodes (no corners).
    static Pseudograph from_leaf(double c, std::span<const double> momenta);

    [[nodiscard]] double c() const { return c_; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const std::vector<NodeInterval>& nodes() const { return nodes_; }
    // Vertices from theta = 0 to theta = 1; corners contribute their upper then lower end.
    [[nodiscard]] const std::vector<MapPoint>& polyline() const { return polyline_; }
    [[nodiscard]] std::size_t corner_count() const;
    [[nodiscard]] bool is_corner(std::size_t i) const;
    // Momentum range [min lower, max upper] over nodes whose theta lies within half a cell.
    [[nodiscard]] NodeInterval envelope_at(double theta) const;
    // Distance in the annulus metric (circle in theta, absolute in r) to the polyline.
    [[nodiscard]] double distance_to(MapPoint p) const;

    // Two columns (theta, r); vertical segments are separated from graph pieces by NaN rows.
    void write_csv(std::ostream& out) const;

private:
    void build_polyline();

    double c_ = 0.0;
    std::vector<NodeInterval> nodes_;
    std::vector<MapPoint> polyline_;
};

// Pseudograph of c + u' with intervals from super_differential.
[[nodiscard]] Pseudograph full_pseudograph(double c, const GridFunction& u);

// Symmetric Hausdorff distance between two polylines (vertices of one against segments of the other).
[[nodiscard]] double hausdorff_distance(const Pseudograph& a, const Pseudograph& b);

struct VerticalOrder {
    double margin = 0.0;  // min over nodes of (lower of upper graph) - (upper of lower graph)
    bool pass = false;    // margin > -slack
};
// Requires rho_below < rho_above; both graphs on the same node grid.
[[nodiscard]] VerticalOrder check_vertical_order(const Pseudograph& below, const Pseudograph& above,
                                                 double rho_below, double rho_above);

struct CoveringReport {
    std::vector<double> distances;  // per sample, min over rows
    double max_distance = 0.0;
    double slack = 0.0;
    double leaf_lipschitz = 0.0;  // max over neighbours of d_H / delta c
    double c_step = 0.0;
    bool pass = false;
};
// Rows must be sorted by c. Throws RangeTooNarrow if a sample lies outside the swept band.
[[nodiscard]] CoveringReport covering_check(std::span<const Pseudograph> rows,
                                            std::span<const MapPoint> samples);

// Projected dynamics theta -> pi_1 f(theta, p(theta)) with p the midpoint of each node interval.
class CircleMap {
public:
    CircleMap() = default;
    explicit CircleMap(std::vector<double> lifted_images) : image_(std::move(lifted_images)) {}

    [[nodiscard]] std::size_t size() const { return image_.size(); }
    // Lifted image of node i (image - theta_i is the displacement).
    [[nodiscard]] double node_image(std::size_t i) const { return image_[i]; }
    // Lift evaluated anywhere by interpolating the periodic displacement.
    [[nodiscard]] double operator()(double theta) const;
    [[nodiscard]] bool monotone() const;
    // Average displacement of the orbit of theta0 over `steps` iterations.
    [[nodiscard]] double rotation_number(std::size_t steps, double theta0 = 0.0) const;

private:
    std::vector<double> image_;
};

// Throws TooManyCorners if more than n / 10 nodes are corners.
[[nodiscard]] CircleMap circle_map(const GeneratingFamily& family, const Pseudograph& graph);

}  // namespace weakkam
