#include "weakkam/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "weakkam/errors.hpp"
#include "weakkam/io.hpp"
#include "weakkam/pseudograph.hpp"
#include "weakkam/weak_kam.hpp"

namespace weakkam {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

std::vector<double> parse_row(const std::string& line) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        out.push_back(std::stod(cell, &used));
    }
    return out;
}

// Periodic four-point Lagrange interpolation of nodal values (theta may be any real).
double periodic_at(const GridFunction& f, double theta) {
    const auto n = static_cast<long>(f.size());
    const double x = theta * static_cast<double>(n);
    const double base = std::floor(x);
    const double t = x - base;
    const auto node = [&](long k) {
        const long idx = ((static_cast<long>(base) + k) % n + n) % n;
        return f[static_cast<std::size_t>(idx)];
    };
    const double fm = node(-1), f0 = node(0), f1 = node(1), f2 = node(2);
    return -t * (t - 1.0) * (t - 2.0) / 6.0 * fm + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * f0 -
           (t + 1.0) * t * (t - 2.0) / 2.0 * f1 + (t + 1.0) * t * (t - 1.0) / 6.0 * f2;
}

}  // namespace

FoliationSurface::FoliationSurface(std::vector<double> c_values, std::vector<GridFunction> columns)
    : c_(std::move(c_values)), columns_(std::move(columns)) {
    if (c_.size() != columns_.size()) throw std::invalid_argument("FoliationSurface: column count mismatch");
    if (c_.size() < 3) throw std::invalid_argument("FoliationSurface: need at least three columns");
    for (std::size_t j = 0; j + 1 < c_.size(); ++j)
        if (!(c_[j + 1] > c_[j])) throw std::invalid_argument("FoliationSurface: classes must increase");
    for (const auto& col : columns_)
        if (col.size() != columns_.front().size() || col.size() < 3)
            throw std::invalid_argument("FoliationSurface: ragged or tiny columns");
}

FoliationSurface FoliationSurface::from_function(std::size_t n, std::vector<double> c_values,
                                                 const std::function<double(double, double)>& u) {
    std::vector<GridFunction> cols;
    for (const double c : c_values) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = u(static_cast<double>(i) / static_cast<double>(n), c);
        cols.emplace_back(std::move(v));
    }
    return FoliationSurface(std::move(c_values), std::move(cols));
}

FoliationSurface FoliationSurface::from_selection(const SelectionSurface& surface) {
    std::vector<GridFunction> cols;
    for (const auto& row : surface.rows) cols.push_back(row.u);
    return FoliationSurface(surface.c_grid, std::move(cols));
}

FoliationSurface FoliationSurface::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("foliation CSV: missing header");
    const std::vector<double> header = parse_row(line);
    if (header.size() < 2) throw std::invalid_argument("foliation CSV: header too short");
    const auto n = static_cast<std::size_t>(header[0]);
    const auto m = static_cast<std::size_t>(header[1]);
    if (header.size() != 2 + n + m) throw std::invalid_argument("foliation CSV: header length does not match n, m");
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(header[2 + i] - static_cast<double>(i) / static_cast<double>(n)) > 1e-12)
            throw std::invalid_argument("foliation CSV: theta nodes must be i / n");
    std::vector<double> c(header.begin() + 2 + static_cast<std::ptrdiff_t>(n), header.end());
    std::vector<std::vector<double>> cols(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw std::invalid_argument("foliation CSV: missing value rows");
        const std::vector<double> row = parse_row(line);
        if (row.size() != m) throw std::invalid_argument("foliation CSV: row length does not match m");
        for (std::size_t j = 0; j < m; ++j) cols[j][i] = row[j];
    }
    std::vector<GridFunction> grid;
    for (auto& col : cols) grid.emplace_back(std::move(col));
    return FoliationSurface(std::move(c), std::move(grid));
}

void FoliationSurface::write_csv(std::ostream& out) const {
    std::vector<double> header{static_cast<double>(n()), static_cast<double>(m())};
    for (std::size_t i = 0; i < n(); ++i) header.push_back(static_cast<double>(i) / static_cast<double>(n()));
    header.insert(header.end(), c_.begin(), c_.end());
    write_csv_row(out, header);
    std::vector<double> row(m());
    for (std::size_t i = 0; i < n(); ++i) {
        for (std::size_t j = 0; j < m(); ++j) row[j] = value(i, j);
        write_csv_row(out, row);
    }
}

double FoliationSurface::du_dtheta(std::size_t i, std::size_t j) const {
    const GridFunction& u = columns_[j];
    const std::size_t nn = u.size();
    const auto at = [&](long k) { return u[static_cast<std::size_t>((static_cast<long>(i) + k + 2 * static_cast<long>(nn)) % static_cast<long>(nn))]; };
    return (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) * static_cast<double>(nn) / 12.0;
}

double FoliationSurface::du_dc(std::size_t i, std::size_t j) const {
    const std::size_t lo = j == 0 ? 0 : j - 1;
    const std::size_t hi = j + 1 == m() ? j : j + 1;
    return (value(i, hi) - value(i, lo)) / (c_[hi] - c_[lo]);
}

double FoliationSurface::leaf(std::size_t i, std::size_t j) const { return c_[j] + du_dtheta(i, j); }

double FoliationSurface::straightened(std::size_t i, std::size_t j) const {
    return static_cast<double>(i) / static_cast<double>(n()) + du_dc(i, j);
}

GridFunction FoliationSurface::leaf_column(std::size_t j) const {
    std::vector<double> v(n());
    for (std::size_t i = 0; i < n(); ++i) v[i] = leaf(i, j);
    return GridFunction(std::move(v));
}

GridFunction FoliationSurface::du_dc_column(std::size_t j) const {
    std::vector<double> v(n());
    for (std::size_t i = 0; i < n(); ++i) v[i] = du_dc(i, j);
    return GridFunction(std::move(v));
}

double FoliationSurface::normalization_defect() const {
    double sup = 0.0;
    for (const auto& col : columns_) sup = std::max(sup, std::abs(col[0]));
    return sup;
}

double FoliationSurface::leaf_order_margin() const {
    double margin = infinity;
    for (std::size_t j = 0; j + 1 < m(); ++j)
        for (std::size_t i = 0; i < n(); ++i) margin = std::min(margin, leaf(i, j + 1) - leaf(i, j));
    return margin;
}

FoliationSurface FoliationSurface::coarsened() const {
    std::vector<double> c;
    std::vector<GridFunction> cols;
    for (std::size_t j = 0; j < m(); j += 2) {
        c.push_back(c_[j]);
        std::vector<double> v;
        for (std::size_t i = 0; i < n(); i += 2) v.push_back(value(i, j));
        cols.emplace_back(std::move(v));
    }
    return FoliationSurface(std::move(c), std::move(cols));
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::straightenable: return "STRAIGHTENABLE";
        case Verdict::not_straightenable: return "NOT";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

namespace {

struct C1Audit {
    double defect = 0.0;
    std::optional<Witness> witness;
};

// One-sided c-quotients at steps s and 2s; a gap that exceeds c1_tol without shrinking with the step
// marks a missing partial derivative.
C1Audit c1_audit(const FoliationSurface& F, double c1_tol) {
    C1Audit audit;
    for (std::size_t j = 2; j + 2 < F.m(); ++j) {
        const double s1 = F.c_values()[j + 1] - F.c_values()[j];
        const double s1b = F.c_values()[j] - F.c_values()[j - 1];
        const double s2 = F.c_values()[j + 2] - F.c_values()[j];
        const double s2b = F.c_values()[j] - F.c_values()[j - 2];
        for (std::size_t i = 0; i < F.n(); ++i) {
            const double u = F.value(i, j);
            const double fine = std::abs((F.value(i, j + 1) - u) / s1 - (u - F.value(i, j - 1)) / s1b);
            const double coarse = std::abs((F.value(i, j + 2) - u) / s2 - (u - F.value(i, j - 2)) / s2b);
            if (fine > c1_tol && fine >= 0.75 * coarse && fine > audit.defect) {
                audit.defect = fine;
                audit.witness = Witness{F.c_values()[j], static_cast<double>(i) / static_cast<double>(F.n()), fine};
            }
        }
    }
    return audit;
}

}  // namespace

StraightenResult straighten_test(const FoliationSurface& F, const FoliationTolerances& tol) {
    StraightenResult result;
    const C1Audit audit = c1_audit(F, tol.c1_tol);
    result.c1_defect = audit.defect;
    if (audit.witness) {
        result.verdict = Verdict::not_straightenable;
        result.stage = "c1";
        result.witness = audit.witness;
        return result;
    }
    const std::size_t n = F.n();
    const double nd = static_cast<double>(n);
    result.min_slope = infinity;
    std::optional<Witness> worst;
    for (std::size_t j = 0; j < F.m(); ++j) {
        double winding = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double next = i + 1 < n ? F.straightened(i + 1, j) : F.straightened(0, j) + 1.0;
            const double step = next - F.straightened(i, j);
            winding += step;
            const double slope = step * nd;
            if (slope < result.min_slope) {
                result.min_slope = slope;
                worst = Witness{F.c_values()[j], static_cast<double>(i) / nd, slope};
            }
        }
        if (std::lround(winding) != 1 || std::abs(winding - 1.0) > 1e-9) {
            result.verdict = Verdict::not_straightenable;
            result.stage = "degree";
            result.witness = Witness{F.c_values()[j], 0.0, winding};
            return result;
        }
    }
    if (result.min_slope < tol.mono_tol / 2.0) {
        result.verdict = Verdict::not_straightenable;
        result.stage = "monotone";
        result.witness = worst;
        return result;
    }
    if (result.min_slope <= tol.mono_tol) {
        result.verdict = Verdict::inconclusive;
        result.stage = "monotone";
        result.witness = worst;
        return result;
    }
    result.verdict = Verdict::straightenable;
    result.area_residual = area_preservation_residual(F);
    return result;
}

double area_preservation_residual(const FoliationSurface& F, std::size_t rectangles, unsigned seed) {
    // Original region: between leaves a < b over nodes [i1, i2], leaves from forward theta differences.
    // Image region: bounded by the straightened curves at i1, i2, with forward c differences.
    const std::size_t n = F.n();
    const double nd = static_cast<double>(n);
    const auto& c = F.c_values();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> node(0, n - 1), col(0, F.m() - 1);
    double worst = 0.0;
    for (std::size_t r = 0; r < rectangles; ++r) {
        std::size_t i1 = node(rng), i2 = node(rng), a = col(rng), b = col(rng);
        if (i1 == i2 || a == b) continue;
        if (i1 > i2) std::swap(i1, i2);
        if (a > b) std::swap(a, b);
        double original = 0.0;
        for (std::size_t i = i1; i < i2; ++i) {
            const double leaf_a = c[a] + (F.value(i + 1, a) - F.value(i, a)) * nd;
            const double leaf_b = c[b] + (F.value(i + 1, b) - F.value(i, b)) * nd;
            original += (leaf_b - leaf_a) / nd;
        }
        double image = 0.0;
        for (std::size_t j = a; j < b; ++j) {
            const double dc = c[j + 1] - c[j];
            const double x2 = static_cast<double>(i2) / nd + (F.value(i2, j + 1) - F.value(i2, j)) / dc;
            const double x1 = static_cast<double>(i1) / nd + (F.value(i1, j + 1) - F.value(i1, j)) / dc;
            image += (x2 - x1) * dc;
        }
        worst = std::max(worst, std::abs(original - image));
    }
    return worst;
}

LipschitzResult lipschitz_integrability_test(const FoliationSurface& F, const FoliationTolerances& tol,
                                             double margin) {
    LipschitzResult result;
    if (c1_audit(F, tol.c1_tol).witness) {
        result.stage = "c1";
        return result;
    }
    const auto mixed_bounds = [](const FoliationSurface& S) {
        const double nd = static_cast<double>(S.n());
        double lo = infinity, sup = 0.0;
        for (std::size_t j = 0; j + 1 < S.m(); ++j) {
            const double dc = S.c_values()[j + 1] - S.c_values()[j];
            for (std::size_t i = 0; i < S.n(); ++i) {
                const std::size_t k = (i + 1) % S.n();
                const double mixed = (S.value(k, j + 1) - S.value(k, j) - S.value(i, j + 1) + S.value(i, j)) * nd / dc;
                lo = std::min(lo, mixed);
                sup = std::max(sup, std::abs(mixed));
            }
        }
        return std::pair{lo, sup};
    };
    const auto [k, fine] = mixed_bounds(F);
    result.k = k;
    // Leaves and straightened curves have Lipschitz constant 1 + |mixed| in c and theta respectively.
    result.lipschitz_fine = 1.0 + fine;
    result.lipschitz_coarse = 1.0 + mixed_bounds(F.coarsened()).second;
    if (!(k > -1.0 + margin) || !std::isfinite(fine)) {
        result.stage = "bound";
        return result;
    }
    if (result.lipschitz_fine > 2.0 * result.lipschitz_coarse) {
        result.stage = "refinement";
        return result;
    }
    result.pass = true;
    return result;
}

RotationFormResult rotation_form_check(const GeneratingFamily& family, const FoliationSurface& F,
                                       const std::vector<std::size_t>& columns) {
    RotationFormResult result;
    const std::size_t n = F.n();
    const double tol = corner_threshold(n);
    for (const std::size_t j : columns) {
        if (j >= F.m()) throw std::out_of_range("rotation_form_check: column index");
        const GridFunction leaf = F.leaf_column(j);
        const GridFunction shift = F.du_dc_column(j);
        const auto straight = [&](double theta) { return theta + periodic_at(shift, theta); };
        double rho = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double theta = leaf.node(i);
            const LiftPoint image = forward_lift(family, {theta, leaf[i]});
            const double defect = std::abs(image.r - periodic_at(leaf, image.theta));
            if (defect > tol) throw NotInvariantFoliation(F.c_values()[j], defect);
            const double moved = straight(image.theta) - straight(theta);
            if (i == 0) rho = moved;
            result.residual = std::max(result.residual, std::abs(circle_offset(moved - rho)));
            // Class of the image point, located between neighbouring leaves at the image angle.
            double c_image = F.c_values()[j];
            const double here = periodic_at(leaf, image.theta);
            const std::size_t other = image.r >= here ? std::min(j + 1, F.m() - 1) : (j == 0 ? 0 : j - 1);
            if (other != j) {
                const double there = periodic_at(F.leaf_column(other), image.theta);
                const double t = (image.r - here) / (there - here);
                c_image += t * (F.c_values()[other] - F.c_values()[j]);
            }
            result.leaf_drift = std::max(result.leaf_drift, std::abs(c_image - F.c_values()[j]));
        }
        result.rho.push_back(rho);
    }
    result.residual = std::max(result.residual, result.leaf_drift);
    result.pass = result.residual <= 1e-3;
    return result;
}

ConjugacyResult conjugacy_check(const GeneratingFamily& family, double c, const GridFunction& u,
                                const GridFunction& du_dc, double rho) {
    if (u.size() != du_dc.size()) throw std::invalid_argument("conjugacy_check: grid mismatch");
    const Pseudograph graph = full_pseudograph(c, u);
    const CircleMap g = circle_map(family, graph);
    const std::size_t n = u.size();
    const double nd = static_cast<double>(n);
    ConjugacyResult result;
    result.injective = true;
    const auto h = [&](double theta) { return theta + du_dc.at(theta); };
    // Cells touching a corner: u has no derivative there, so h is undefined.
    const auto near_corner = [&](double theta) {
        const auto below = static_cast<std::size_t>(std::floor(wrap01(theta) * nd)) % n;
        return graph.is_corner(below) || graph.is_corner((below + 1) % n);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = u.node(i);
        const double next = i + 1 < n ? h(u.node(i + 1)) : h(0.0) + 1.0;
        if (!(next > h(theta))) result.injective = false;
        if (graph.is_corner(i) || near_corner(g.node_image(i))) {
            ++result.excluded;
            continue;
        }
        result.residual = std::max(result.residual, std::abs(circle_offset(h(g.node_image(i)) - h(theta) - rho)));
    }
    return result;
}

FoliationSurface standard_foliation(std::size_t n, std::vector<double> c_values) {
    return FoliationSurface::from_function(n, std::move(c_values), [](double, double) { return 0.0; });
}

FoliationSurface conjugated_foliation(const ConjugacyProfile& profile, std::size_t n, std::vector<double> c_values) {
    return FoliationSurface::from_function(n, std::move(c_values), [&](double theta, double c) {
        return profile.weak_kam(c, theta) - profile.weak_kam(c, 0.0);
    });
}

FoliationSurface triangle_wave_foliation(std::size_t n, std::vector<double> c_values) {
    return FoliationSurface::from_function(n, std::move(c_values), [](double theta, double c) {
        const double eps = (1.0 - std::abs(c)) / (4.0 * std::numbers::pi);
        return eps / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * theta);
    });
}

FoliationSurface smooth_wave_foliation(std::size_t n, std::vector<double> c_values) {
    return FoliationSurface::from_function(n, std::move(c_values), [](double theta, double c) {
        const double eps = std::cos(c) / (4.0 * std::numbers::pi);
        return eps / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi * theta);
    });
}

}  // namespace weakkam
