#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "weakkam/twist_map.hpp"

namespace weakkam {

// Periodic configuration x_0..x_{q-1} extended by x_{j+q} = x_j + p.
struct PeriodicConfiguration {
    long p = 0;
    long q = 1;
    std::vector<double> thetas;  // lifted, thetas[0] in [0, 1)
    double action = 0.0;         // sum_{j<q} S(x_j, x_{j+1})
    double stationarity = 0.0;   // max_j |d2 S(x_{j-1}, x_j) + d1 S(x_j, x_{j+1})|

    // Lifted point x_k for any integer k.
    [[nodiscard]] double at(long k) const;
    // x_{start}, ..., x_{start+length-1}, each plus `translate`.
    [[nodiscard]] std::vector<double> segment(long start, std::size_t length, long translate = 0) const;
};

struct MatherSet {
    long p = 0;
    long q = 1;
    std::vector<PeriodicConfiguration> orbits;
    double min_action = 0.0;
    bool continuum = false;  // translation family detected (flat action with a null Hessian mode)
    std::size_t restarts = 0;

    void write_json(std::ostream& out) const;
};

// Action of a configuration with the periodic closing x_q = x_0 + p.
[[nodiscard]] double periodic_action(const GeneratingFamily& family, long p, std::span<const double> x);

// Smallest eigenvalue of the action Hessian (cyclic tridiagonal) at a configuration.
[[nodiscard]] double smallest_hessian_eigenvalue(const GeneratingFamily& family, const PeriodicConfiguration& c);

// Cyclic coordinate descent from `restarts` jittered equally spaced seeds, polished by Newton steps.
// Restarts that stall are dropped; NoDescentProgress only when all of them do.
// Result sorted by (action, theta_0) and deduplicated modulo index shift and integer translation.
[[nodiscard]] std::vector<PeriodicConfiguration> minimize_periodic(const GeneratingFamily& family, long p, long q,
                                                                   std::size_t restarts, unsigned seed);

// Minimizers within 1e-8 of the smallest action found.
[[nodiscard]] MatherSet mather_set(const GeneratingFamily& family, long p, long q, std::size_t restarts = 5,
                                   unsigned seed = 1);

// Coincidences (|a_k - b_k| <= 1e-9) plus strict sign changes between neighbouring indices.
[[nodiscard]] int crossing_count(std::span<const double> a, std::span<const double> b);

}  // namespace weakkam
