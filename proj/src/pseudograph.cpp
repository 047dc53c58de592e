#include "weakkam/pseudograph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "weakkam/errors.hpp"
#include "weakkam/io.hpp"
#include "weakkam/parallel.hpp"

namespace weakkam {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

double estimate_semiconcavity(const GridFunction& u) {
    const std::size_t n = u.size();
    const double n2 = static_cast<double>(n) * static_cast<double>(n);
    double K = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        K = std::max(K, (u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) * n2);
    return K;
}

double segment_distance(double ax, double ay, double bx, double by) {
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? -(ax * dx + ay * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(ax + t * dx, ay + t * dy);
}

}  // namespace

std::vector<NodeInterval> super_differential(const GridFunction& u) {
    const std::size_t n = u.size();
    if (n < 3) throw std::invalid_argument("super_differential: need at least three nodes");
    const double nd = static_cast<double>(n);
    const double K = u.semiconcavity_K ? *u.semiconcavity_K : estimate_semiconcavity(u);
    const double slack = first_order_slack(n);
    std::vector<NodeInterval> out(n);
    std::vector<double> excess(n, 0.0);
    parallel_for(n, [&](std::size_t x) {
        const double left = (u[x] - u[(x + n - 1) % n]) * nd;
        const double right = (u[(x + 1) % n] - u[x]) * nd;
        out[x] = left >= right ? NodeInterval{right, left} : NodeInterval{0.5 * (left + right), 0.5 * (left + right)};
        // Admissible super-derivatives: p >= bound for y ahead, p <= bound for y behind.
        double lo = -infinity, hi = infinity;
        for (std::size_t y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = circle_offset((static_cast<double>(y) - static_cast<double>(x)) / nd);
            const double bound = (u[y] - u[x] - 0.5 * K * d * d) / d;
            if (d > 0.0) lo = std::max(lo, bound);
            else hi = std::min(hi, bound);
        }
        excess[x] = lo - hi;
    });
    for (std::size_t x = 0; x < n; ++x)
        if (excess[x] > slack) throw NotSemiConcave(x, excess[x]);
    return out;
}

Pseudograph::Pseudograph(double c, std::vector<NodeInterval> nodes) : c_(c), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::invalid_argument("Pseudograph: no nodes");
    build_polyline();
}

Pseudograph Pseudograph::from_leaf(double c, std::span<const double> momenta) {
    std::vector<NodeInterval> nodes;
    nodes.reserve(momenta.size());
    for (const double r : momenta) nodes.push_back({r, r});
    return Pseudograph(c, std::move(nodes));
}

bool Pseudograph::is_corner(std::size_t i) const { return nodes_[i].width() > corner_threshold(nodes_.size()); }

std::size_t Pseudograph::corner_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) count += is_corner(i) ? 1 : 0;
    return count;
}

void Pseudograph::build_polyline() {
    const std::size_t n = nodes_.size();
    polyline_.clear();
    polyline_.reserve(n + 2);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = static_cast<double>(i) / static_cast<double>(n);
        if (is_corner(i)) {
            polyline_.push_back({theta, nodes_[i].upper});
            polyline_.push_back({theta, nodes_[i].lower});
        } else {
            polyline_.push_back({theta, nodes_[i].mid()});
        }
    }
    polyline_.push_back({1.0, is_corner(0) ? nodes_[0].upper : nodes_[0].mid()});
}

NodeInterval Pseudograph::envelope_at(double theta) const {
    const std::size_t n = nodes_.size();
    const double x = wrap01(theta) * static_cast<double>(n);
    const auto below = static_cast<std::size_t>(std::floor(x)) % n;
    const std::size_t above = (below + 1) % n;
    return {std::min(nodes_[below].lower, nodes_[above].lower), std::max(nodes_[below].upper, nodes_[above].upper)};
}

double Pseudograph::distance_to(MapPoint p) const {
    const std::size_t segments = polyline_.size() - 1;
    const double theta = wrap01(p.theta);
    const auto it = std::lower_bound(polyline_.begin(), polyline_.end(), theta,
                                     [](const MapPoint& v, double t) { return v.theta < t; });
    std::size_t k0 = static_cast<std::size_t>(it - polyline_.begin());
    k0 = k0 == 0 ? 0 : k0 - 1;
    if (k0 >= segments) k0 = segments - 1;
    double best = infinity;
    // Returns the theta gap of segment k and updates best.
    const auto visit = [&](std::size_t k) {
        const MapPoint& a = polyline_[k];
        const MapPoint& b = polyline_[k + 1];
        const double ax = circle_offset(a.theta - theta);
        const double bx = ax + (b.theta - a.theta);
        best = std::min(best, segment_distance(ax, a.r - p.r, bx, b.r - p.r));
        if (ax <= 0.0 && bx >= 0.0) return 0.0;
        return std::min(std::abs(ax), std::abs(bx));
    };
    bool forward = true, backward = true;
    for (std::size_t s = 0; s < segments && (forward || backward); ++s) {
        if (forward && visit((k0 + s) % segments) > best) forward = false;
        if (backward && s > 0 && visit((k0 + segments - s) % segments) > best) backward = false;
    }
    return best;
}

void Pseudograph::write_csv(std::ostream& out) const {
    out << "theta,r\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MapPoint previous = polyline_.front();
    bool first = true;
    for (const MapPoint& v : polyline_) {
        const bool vertical = !first && v.theta == previous.theta;
        if (vertical) {
            // Isolate the vertical segment between NaN rows.
            const double sep[] = {nan, nan};
            write_csv_row(out, sep);
            const double top[] = {previous.theta, previous.r};
            write_csv_row(out, top);
            const double bottom[] = {v.theta, v.r};
            write_csv_row(out, bottom);
            write_csv_row(out, sep);
        }
        const double row[] = {v.theta, v.r};
        write_csv_row(out, row);
        previous = v;
        first = false;
    }
}

Pseudograph full_pseudograph(double c, const GridFunction& u) {
    std::vector<NodeInterval> nodes = super_differential(u);
    for (NodeInterval& iv : nodes) {
        iv.lower += c;
        iv.upper += c;
    }
    return Pseudograph(c, std::move(nodes));
}

double hausdorff_distance(const Pseudograph& a, const Pseudograph& b) {
    double sup = 0.0;
    for (const MapPoint& v : a.polyline()) sup = std::max(sup, b.distance_to(v));
    for (const MapPoint& v : b.polyline()) sup = std::max(sup, a.distance_to(v));
    return sup;
}

VerticalOrder check_vertical_order(const Pseudograph& below, const Pseudograph& above, double rho_below,
                                   double rho_above) {
    if (below.size() != above.size()) throw std::invalid_argument("check_vertical_order: grid mismatch");
    if (!(rho_below < rho_above)) throw std::invalid_argument("check_vertical_order: rotation numbers not ordered");
    VerticalOrder result;
    result.margin = infinity;
    for (std::size_t i = 0; i < below.size(); ++i)
        result.margin = std::min(result.margin, above.nodes()[i].lower - below.nodes()[i].upper);
    result.pass = result.margin > -first_order_slack(below.size());
    return result;
}

CoveringReport covering_check(std::span<const Pseudograph> rows, std::span<const MapPoint> samples) {
    if (rows.size() < 2) throw std::invalid_argument("covering_check: need at least two rows");
    CoveringReport report;
    for (std::size_t j = 0; j + 1 < rows.size(); ++j) {
        const double dc = rows[j + 1].c() - rows[j].c();
        if (!(dc > 0.0)) throw std::invalid_argument("covering_check: rows must be sorted by c");
        report.c_step = std::max(report.c_step, dc);
    }
    std::vector<double> lipschitz(rows.size() - 1);
    parallel_for(rows.size() - 1, [&](std::size_t j) {
        lipschitz[j] = hausdorff_distance(rows[j], rows[j + 1]) / (rows[j + 1].c() - rows[j].c());
    });
    report.leaf_lipschitz = *std::max_element(lipschitz.begin(), lipschitz.end());
    report.slack = report.c_step * report.leaf_lipschitz + first_order_slack(rows.front().size());

    for (const MapPoint& s : samples) {
        double low = infinity, high = -infinity;
        for (const Pseudograph& row : rows) {
            const NodeInterval env = row.envelope_at(s.theta);
            low = std::min(low, env.lower);
            high = std::max(high, env.upper);
        }
        if (s.r < low || s.r > high) throw RangeTooNarrow(s.theta, s.r);
    }
    report.distances.assign(samples.size(), infinity);
    parallel_for(samples.size(), [&](std::size_t k) {
        double best = infinity;
        for (const Pseudograph& row : rows) best = std::min(best, row.distance_to(samples[k]));
        report.distances[k] = best;
    });
    report.max_distance = *std::max_element(report.distances.begin(), report.distances.end());
    report.pass = report.max_distance <= report.slack;
    return report;
}

double CircleMap::operator()(double theta) const {
    const std::size_t n = image_.size();
    const double nd = static_cast<double>(n);
    const double base = std::floor(theta);
    const double x = (theta - base) * nd;
    const auto i = std::min(static_cast<std::size_t>(x), n - 1);
    const double frac = x - static_cast<double>(i);
    const std::size_t j = (i + 1) % n;
    const double di = image_[i] - static_cast<double>(i) / nd;
    const double dj = image_[j] - static_cast<double>(j) / nd;
    return theta + (1.0 - frac) * di + frac * dj;
}

bool CircleMap::monotone() const {
    const std::size_t n = image_.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(image_[i + 1] > image_[i])) return false;
    return image_[0] + 1.0 > image_[n - 1];
}

double CircleMap::rotation_number(std::size_t steps, double theta0) const {
    if (steps == 0) throw std::invalid_argument("rotation_number: need at least one step");
    double x = theta0;
    for (std::size_t k = 0; k < steps; ++k) x = (*this)(x);
    return (x - theta0) / static_cast<double>(steps);
}

CircleMap circle_map(const GeneratingFamily& family, const Pseudograph& graph) {
    const std::size_t n = graph.size();
    const std::size_t corners = graph.corner_count();
    if (corners * 10 > n) throw TooManyCorners(corners, n);
    std::vector<double> image(n);
    parallel_for(n, [&](std::size_t i) {
        const double theta = static_cast<double>(i) / static_cast<double>(n);
        image[i] = forward_lift(family, {theta, graph.nodes()[i].mid()}).theta;
    });
    return CircleMap(std::move(image));
}

}  // namespace weakkam
