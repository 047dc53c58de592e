#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <ostream>
#include <vector>

#include "weakkam/minplus.hpp"
#include "weakkam/twist_map.hpp"

namespace weakkam {

struct SolverOptions {
    std::size_t n_grid = 1024;
    double tol = 1e-9;
    int window = 0;              // 0: default_window(c)
    std::size_t max_iters = 0;   // 0: 50 * n_grid
    std::size_t warm_iters = 64;  // value-iteration budget from u = 0 before switching start
};

// Output of the additive-eigenvalue solve for one cohomology class.
struct AlphaSolution {
    double alpha = 0.0;
    GridFunction u;                 // max-normalized fixed point of T + alpha
    double residual = 0.0;          // sup |T u + alpha - u|
    std::size_t iterations = 0;     // value-iteration steps
    double discount_alpha = 0.0;    // -(1 - lambda) u_lambda averaged on the critical cycle
    bool cross_check_passed = false;
    std::vector<std::size_t> critical_cycle;  // grid Mather measure support (in cycle order)
    long winding = 0;               // lifted displacement of the critical cycle
    std::shared_ptr<const CostMatrix> cost;

    [[nodiscard]] double grid_rotation() const {
        return critical_cycle.empty() ? 0.0
                                      : static_cast<double>(winding) /
                                            static_cast<double>(critical_cycle.size());
    }
};

[[nodiscard]] AlphaSolution solve_alpha(const GeneratingFamily& family, double c,
                                        const SolverOptions& options = {});

struct WeakKamSolution {
    double c = 0.0;
    double alpha = 0.0;
    GridFunction u;  // u(0) = 0
    double residual = 0.0;
    double domination_violation = 0.0;
    std::vector<std::size_t> critical_cycle;
    long winding = 0;
    std::shared_ptr<const CostMatrix> cost;
};

[[nodiscard]] WeakKamSolution weak_kam_solution(const GeneratingFamily& family, double c,
                                                const SolverOptions& options = {});

// sup |T u + alpha - u| for the given cost.
[[nodiscard]] double fixed_point_residual(const GridFunction& u, const CostMatrix& A, double alpha);

// max over grid pairs of u(x) - u(y) - A(y, x) - alpha.
[[nodiscard]] double check_dominated(const GridFunction& u, const GeneratingFamily& family,
                                     double c, double alpha);
[[nodiscard]] double check_dominated(const GridFunction& u, const CostMatrix& A, double alpha);

enum class RhoMethod { alpha_derivative, orbit };

struct RhoOptions {
    double h = 1e-3;
    std::size_t orbit_steps = 10000;
    double agreement = 5e-3;
};

[[nodiscard]] double rho_of_c(const GeneratingFamily& family, double c, RhoMethod method,
                              const SolverOptions& solver = {}, const RhoOptions& options = {});

struct RotationEstimate {
    double from_alpha = 0.0;
    double from_orbit = 0.0;
};
// Both estimators; throws MethodDisagreement when they differ by more than options.agreement.
[[nodiscard]] RotationEstimate rotation_number(const GeneratingFamily& family, double c,
                                               const SolverOptions& solver = {},
                                               const RhoOptions& options = {});

// Fixed point of u(x) = min_y lambda u(y) + A(y, x) + shift, by policy iteration.
[[nodiscard]] GridFunction discounted_fixed_point(const CostMatrix& A, double lambda, double shift);

struct DiscountOptions {
    std::vector<double> lambdas;  // empty: 1 - 2^-k for k = 4..12
    SolverOptions solver;
};

struct DiscountedSolution {
    double c = 0.0;
    double alpha = 0.0;
    GridFunction limit;  // extrapolated lambda -> 1 limit
    std::vector<double> lambdas;
    std::vector<GridFunction> fixed_points;
    double extrapolation_jump = 0.0;  // sup gap of the last two extrapolants
    double mather_integral = 0.0;     // integral of the limit against the grid Mather measure
    bool mather_check_passed = false;
};

// Throws ExtrapolationUnstable if the last two extrapolants differ by more than ten grid slacks.
[[nodiscard]] DiscountedSolution discounted_solution(const GeneratingFamily& family, double c,
                                                     const DiscountOptions& options = {});

struct Plateau {
    long p = 0;
    long q = 1;
    double a1 = 0.0;
    double a2 = 0.0;
    std::size_t first_row = 0;
    std::size_t last_row = 0;
    std::vector<std::size_t> mather_nodes;
};

struct SelectionOptions {
    SolverOptions solver;
    int q_max = 8;
    double plateau_tol = 1e-6;
    std::size_t min_plateau_steps = 2;
    RhoOptions rho;
    unsigned seed = 1;
};

struct SelectionSurface {
    std::vector<double> c_grid;
    std::vector<WeakKamSolution> rows;
    std::vector<double> rho;
    std::vector<Plateau> plateaus;
    std::vector<bool> plateau_interior;
    // Envelope derivative du/dc of plateau-interior rows (empty elsewhere).
    std::vector<GridFunction> interior_du_dc;

    [[nodiscard]] std::size_t n_grid() const { return rows.empty() ? 0 : rows.front().u.size(); }
    // Envelope derivative on plateau interiors; elsewhere central difference in c (one-sided at the ends).
    [[nodiscard]] double du_dc(std::size_t row, std::size_t node) const;
    [[nodiscard]] double du_dtheta(std::size_t row, std::size_t node) const;
    void write_csv(std::ostream& out) const;
    void write_summary_json(std::ostream& out) const;
};

// Best rational p/q with q <= q_max within tol of x (via continued-fraction convergents);
// throws PlateauDetectionAmbiguous if two distinct rationals fit.
[[nodiscard]] std::optional<std::pair<long, long>> rational_fit(double x, int q_max, double tol,
                                                                double c_for_report = 0.0);

[[nodiscard]] SelectionSurface build_selection(const GeneratingFamily& family, double c_min,
                                               double c_max, std::size_t n_c,
                                               const SelectionOptions& options = {});

}  // namespace weakkam
