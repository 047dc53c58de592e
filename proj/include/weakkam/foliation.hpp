#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "weakkam/minplus.hpp"
#include "weakkam/twist_map.hpp"

namespace weakkam {

struct SelectionSurface;

// Samples u(theta_i, c_j) on n uniform nodes times m sorted classes; column j holds u(., c_j).
class FoliationSurface {
public:
    FoliationSurface() = default;
    FoliationSurface(std::vector<double> c_values, std::vector<GridFunction> columns);

    static FoliationSurface from_function(std::size_t n, std::vector<double> c_values,
                                          const std::function<double(double, double)>& u);
    static FoliationSurface from_selection(const SelectionSurface& surface);
    // First line: n, m, theta_0..theta_{n-1}, c_0..c_{m-1}; then n lines of m values.
    static FoliationSurface read_csv(std::istream& in);
    void write_csv(std::ostream& out) const;

    [[nodiscard]] std::size_t n() const { return columns_.empty() ? 0 : columns_.front().size(); }
    [[nodiscard]] std::size_t m() const { return c_.size(); }
    [[nodiscard]] const std::vector<double>& c_values() const { return c_; }
    [[nodiscard]] const GridFunction& column(std::size_t j) const { return columns_[j]; }
    [[nodiscard]] double value(std::size_t i, std::size_t j) const { return columns_[j][i]; }
    // Five-point central differences in theta; three-point in c (one-sided at the ends).
    [[nodiscard]] double du_dtheta(std::size_t i, std::size_t j) const;
    [[nodiscard]] double du_dc(std::size_t i, std::size_t j) const;
    // Leaf momentum c_j + du/dtheta and straightening coordinate theta_i + du/dc.
    [[nodiscard]] double leaf(std::size_t i, std::size_t j) const;
    [[nodiscard]] double straightened(std::size_t i, std::size_t j) const;
    [[nodiscard]] GridFunction leaf_column(std::size_t j) const;
    [[nodiscard]] GridFunction du_dc_column(std::size_t j) const;

    // Largest |u(0, c_j)|; zero for a normalized surface.
    [[nodiscard]] double normalization_defect() const;
    // min over adjacent columns and nodes of leaf(i, j + 1) - leaf(i, j).
    [[nodiscard]] double leaf_order_margin() const;
    // Every other node and column.
    [[nodiscard]] FoliationSurface coarsened() const;

private:
    std::vector<double> c_;
    std::vector<GridFunction> columns_;
};

enum class Verdict { straightenable, not_straightenable, inconclusive };
[[nodiscard]] std::string to_string(Verdict v);

struct Witness {
    double c = 0.0;
    double theta = 0.0;
    double value = 0.0;
};

struct FoliationTolerances {
    double c1_tol = 1e-3;
    double mono_tol = 1e-3;
};

struct StraightenResult {
    Verdict verdict = Verdict::inconclusive;
    std::string stage;  // "c1", "monotone", "degree" or empty
    std::optional<Witness> witness;
    double c1_defect = 0.0;  // largest one-sided quotient gap that failed to shrink (0 if none)
    double min_slope = 0.0;  // min over columns and cells of the straightening map's slope
    double area_residual = 0.0;
    // Area checks on rectangles certify exactness only up to a global vertical shift.
    bool exact_up_to_vertical_shift = true;
};

[[nodiscard]] StraightenResult straighten_test(const FoliationSurface& surface,
                                               const FoliationTolerances& tolerances = {});

// Largest |difference| of the two areas in the straightening identity over random index rectangles.
[[nodiscard]] double area_preservation_residual(const FoliationSurface& surface, std::size_t rectangles = 200,
                                                unsigned seed = 3);

struct LipschitzResult {
    bool pass = false;
    std::string stage;  // "c1", "bound", "refinement" or empty
    double k = 0.0;     // inf of the mixed difference quotient
    double lipschitz_fine = 0.0;
    double lipschitz_coarse = 0.0;
};

[[nodiscard]] LipschitzResult lipschitz_integrability_test(const FoliationSurface& surface,
                                                           const FoliationTolerances& tolerances = {},
                                                           double margin = 1e-3);

struct RotationFormResult {
    double residual = 0.0;      // max distance of the conjugated image to (x + rho(c), c)
    double leaf_drift = 0.0;    // max |c(image) - c|
    std::vector<double> rho;    // per sampled column
    bool pass = false;          // residual <= 1e-3
};

// Throws NotInvariantFoliation if a sampled leaf is not mapped into itself within 8/n.
[[nodiscard]] RotationFormResult rotation_form_check(const GeneratingFamily& family, const FoliationSurface& surface,
                                                     const std::vector<std::size_t>& columns);

struct ConjugacyResult {
    double residual = 0.0;
    bool injective = false;
    std::size_t excluded = 0;  // nodes at a corner or mapped into a corner cell
};

// Residual of h(g(theta)) = h(theta) + rho with h = theta + du_dc and g the projected dynamics of u,
// over nodes where both sides are defined (away from pseudograph corners).
[[nodiscard]] ConjugacyResult conjugacy_check(const GeneratingFamily& family, double c, const GridFunction& u,
                                              const GridFunction& du_dc, double rho);

// Catalog surfaces on classes c_values.
[[nodiscard]] FoliationSurface standard_foliation(std::size_t n, std::vector<double> c_values);
[[nodiscard]] FoliationSurface conjugated_foliation(const ConjugacyProfile& profile, std::size_t n,
                                                    std::vector<double> c_values);
// u = eps(c) sin(2 pi theta) / (2 pi) with eps(c) = (1 - |c|) / (4 pi): corner at c = 0.
[[nodiscard]] FoliationSurface triangle_wave_foliation(std::size_t n, std::vector<double> c_values);
// Same shape with the smooth amplitude eps(c) = cos(c) / (4 pi).
[[nodiscard]] FoliationSurface smooth_wave_foliation(std::size_t n, std::vector<double> c_values);

}  // namespace weakkam
