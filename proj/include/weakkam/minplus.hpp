#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "weakkam/twist_map.hpp"

namespace weakkam {

// 1-periodic function sampled at theta_i = i / n, linearly interpolated between nodes.
struct GridFunction {
    std::vector<double> values;
    std::optional<double> semiconcavity_K;

    GridFunction() = default;
    explicit GridFunction(std::vector<double> v, std::optional<double> K = std::nullopt)
        : values(std::move(v)), semiconcavity_K(K) {}
    static GridFunction constant(std::size_t n, double value) {
        return GridFunction(std::vector<double>(n, value));
    }

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double node(std::size_t i) const {
        return static_cast<double>(i) / static_cast<double>(values.size());
    }
    [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
    [[nodiscard]] double& operator[](std::size_t i) { return values[i]; }
    // Periodic linear interpolation at any real theta.
    [[nodiscard]] double at(double theta) const;
    [[nodiscard]] double max() const;
    [[nodiscard]] double min() const;
};

[[nodiscard]] double sup_distance(const GridFunction& a, const GridFunction& b);

// Lift-projected cost A(i, j) = min_m S(theta_i, theta_j + m) + c (theta_i - theta_j - m).
class CostMatrix {
public:
    CostMatrix() = default;
    CostMatrix(std::size_t n, double c, int window, std::vector<double> values,
               std::vector<std::int8_t> shifts, GeneratingFamily::GridKernel kernel,
               bool monge_certified)
        : n_(n), c_(c), window_(window), monge_certified_(monge_certified),
          values_(std::move(values)), shifts_(std::move(shifts)), kernel_(std::move(kernel)) {}

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] double c() const { return c_; }
    [[nodiscard]] int window_used() const { return window_; }
    [[nodiscard]] bool monge_certified() const { return monge_certified_; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
    // Minimizing lift shift of entry (i, j).
    [[nodiscard]] int shift(std::size_t i, std::size_t j) const { return shifts_[i * n_ + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * n_, n_};
    }
    // Entry of the unwrapped block with fixed shift m; identical arithmetic to the projected entries.
    [[nodiscard]] double block(std::size_t i, std::size_t j, int m) const;
    [[nodiscard]] const GeneratingFamily::GridKernel& kernel() const { return kernel_; }

    void write_csv(std::ostream& out) const;

    [[nodiscard]] std::span<const double> values() const { return values_; }

private:
    std::size_t n_ = 0;
    double c_ = 0.0;
    int window_ = 0;
    bool monge_certified_ = false;
    std::vector<double> values_;
    std::vector<std::int8_t> shifts_;
    GeneratingFamily::GridKernel kernel_;
};

// Default lift window for class c: ceil(|c|) + 3.
[[nodiscard]] int default_window(double c);

// Throws WindowTooSmall if some minimizing shift reaches +-window.
[[nodiscard]] CostMatrix project_cost(const GeneratingFamily& family, double c, std::size_t n,
                                      int window);
[[nodiscard]] inline CostMatrix project_cost(const GeneratingFamily& family, double c,
                                             std::size_t n) {
    return project_cost(family, c, n, default_window(c));
}

enum class MinplusMode { brute, monge };

struct MinplusResult {
    GridFunction values;
    bool monge_fallback = false;  // certification failed; brute force was used
};

// (T u)(x_j) = min_i u(x_i) + A(i, j).
[[nodiscard]] MinplusResult minplus_apply(const GridFunction& u, const CostMatrix& A,
                                          MinplusMode mode = MinplusMode::brute);

// Column minima together with the minimizing row of every column.
struct ArgminResult {
    std::vector<double> values;
    std::vector<std::size_t> argmin;
};
// The monge mode uses SMAWK on each shift block when the matrix is certified; among equal
// minima it may pick a different source than the brute-force scan.
[[nodiscard]] ArgminResult minplus_apply_argmin(std::span<const double> u, const CostMatrix& A,
                                                MinplusMode mode = MinplusMode::brute);

// Samples random quadruples i < i', j < j' in every shift block and checks the Monge inequality.
[[nodiscard]] bool certify_monge(const CostMatrix& A, std::size_t samples_per_block,
                                 unsigned seed = 7);

// Min-plus power A^steps of the projected cost (entries are the step-count costs).
[[nodiscard]] CostMatrix nstep_cost(const GeneratingFamily& family, double c, std::size_t n_grid,
                                    int steps);

struct ManePotential {
    CostMatrix phi;
    int steps_used = 0;
    bool stabilized = true;  // false: still improving when n_max was reached
};

// Running minimum over k <= n_max of the k-step cost plus k * alpha; stops after `stall`
// consecutive steps without improvement.
[[nodiscard]] ManePotential mane_potential(const GeneratingFamily& family, double c, double alpha,
                                           std::size_t n_grid, int n_max, int stall);

// Mane potential rows Phi(y, .) for the given sources, computed exactly by Dijkstra on the
// reduced costs A(y, x) + alpha + w(y) - w(x) >= 0, where w is a fixed point of T + alpha.
[[nodiscard]] std::vector<std::vector<double>> mane_rows(const CostMatrix& A, double alpha,
                                                         std::span<const double> fixed_point,
                                                         std::span<const std::size_t> sources);

struct ManeRow {
    std::vector<double> phi;           // Phi(y, x)
    std::vector<double> c_slope;       // sum over the minimizing path of d/dc of its edge costs
    std::vector<std::size_t> steps;    // length of the minimizing path
};

// As mane_rows, also reporting the minimizing path of every entry (ties keep the first path found).
[[nodiscard]] std::vector<ManeRow> mane_paths(const CostMatrix& A, double alpha, std::span<const double> fixed_point,
                                              std::span<const std::size_t> sources);

// Grid slack constants for first- and second-order quantities.
[[nodiscard]] inline double first_order_slack(std::size_t n) { return 4.0 / static_cast<double>(n); }
[[nodiscard]] inline double second_order_slack(std::size_t n) { return 16.0 / static_cast<double>(n); }

}  // namespace weakkam
