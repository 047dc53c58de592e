#include "weakkam/aubry_mather.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/parallel.hpp"

namespace weakkam {

namespace {

long floor_div(long a, long b) {
    long d = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --d;
    return d;
}

double point(std::span<const double> x, long p, long k) {
    const long q = static_cast<long>(x.size());
    const long wraps = floor_div(k, q);
    return x[static_cast<std::size_t>(k - wraps * q)] + static_cast<double>(wraps * p);
}

double gradient_at(const GeneratingFamily& f, long p, std::span<const double> x, long j) {
    const double prev = point(x, p, j - 1), here = point(x, p, j), next = point(x, p, j + 1);
    return f.d2(prev, here) + f.d1(here, next);
}

double max_gradient(const GeneratingFamily& f, long p, std::span<const double> x) {
    double g = 0.0;
    for (long j = 0; j < static_cast<long>(x.size()); ++j) g = std::max(g, std::abs(gradient_at(f, p, x, j)));
    return g;
}

Eigen::MatrixXd action_hessian(const GeneratingFamily& f, long p, std::span<const double> x) {
    const long q = static_cast<long>(x.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(q, q);
    for (long j = 0; j < q; ++j) {
        const double a = point(x, p, j), b = point(x, p, j + 1);
        const long k = (j + 1) % q;
        H(j, j) += f.d11(a, b);
        H(k, k) += f.d22(a, b);
        H(j, k) += f.d12(a, b);
        H(k, j) += f.d12(a, b);
    }
    return H;
}

// Minimizes the action along coordinate j with the others frozen (damped Newton with backtracking).
void minimize_slice(const GeneratingFamily& f, long p, std::vector<double>& x, long j) {
    const long q = static_cast<long>(x.size());
    for (int it = 0; it < 50; ++it) {
        const double g = gradient_at(f, p, x, j);
        if (std::abs(g) <= 1e-14) return;
        const double prev = point(x, p, j - 1), here = x[static_cast<std::size_t>(j)], next = point(x, p, j + 1);
        double h = f.d22(prev, here) + f.d11(here, next);
        if (q == 1) h = f.d11(here, here + static_cast<double>(p)) + 2.0 * f.d12(here, here + static_cast<double>(p)) +
                        f.d22(here, here + static_cast<double>(p));
        double step = h > 0.0 ? -g / h : -std::copysign(0.05, g);
        step = std::clamp(step, -0.25, 0.25);
        const double base = periodic_action(f, p, x);
        bool improved = false;
        for (int back = 0; back < 40; ++back) {
            x[static_cast<std::size_t>(j)] = here + step;
            if (periodic_action(f, p, x) <= base) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            x[static_cast<std::size_t>(j)] = here;
            return;
        }
        if (std::abs(step) <= 1e-15) return;
    }
}

// Full Newton polish on the cyclic Hessian; keeps the step only while the gradient shrinks.
void newton_polish(const GeneratingFamily& f, long p, std::vector<double>& x) {
    const long q = static_cast<long>(x.size());
    for (int it = 0; it < 20; ++it) {
        const double g0 = max_gradient(f, p, x);
        if (g0 <= 1e-13) return;
        Eigen::VectorXd g(q);
        for (long j = 0; j < q; ++j) g(j) = gradient_at(f, p, x, j);
        const Eigen::MatrixXd H = action_hessian(f, p, x);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
        if (eig.eigenvalues().minCoeff() <= 1e-10) return;  // flat or saddle direction
        const Eigen::VectorXd step = H.ldlt().solve(-g);
        std::vector<double> trial = x;
        for (long j = 0; j < q; ++j) trial[static_cast<std::size_t>(j)] += step(j);
        if (max_gradient(f, p, trial) >= g0) return;
        x = std::move(trial);
    }
}

// Index shift and integer translation bringing the smallest fractional point to slot 0.
std::vector<double> canonical(std::span<const double> x, long p) {
    const long q = static_cast<long>(x.size());
    long best = 0;
    for (long j = 1; j < q; ++j)
        if (wrap01(x[static_cast<std::size_t>(j)]) < wrap01(x[static_cast<std::size_t>(best)])) best = j;
    const double shift = std::floor(x[static_cast<std::size_t>(best)]);
    std::vector<double> out(static_cast<std::size_t>(q));
    for (long j = 0; j < q; ++j) out[static_cast<std::size_t>(j)] = point(x, p, best + j) - shift;
    return out;
}

// Equal modulo index shift and integer translation (points near 0 and 1 may sit in different slots).
bool same_orbit(const PeriodicConfiguration& a, const PeriodicConfiguration& b) {
    const long q = static_cast<long>(a.thetas.size());
    for (long s = 0; s < q; ++s) {
        double sup = 0.0;
        for (long j = 0; j < q; ++j) sup = std::max(sup, std::abs(circle_offset(a.at(j) - b.at(j + s))));
        if (sup <= 1e-6) return true;
    }
    return false;
}

}  // namespace

double PeriodicConfiguration::at(long k) const { return point(thetas, p, k); }

std::vector<double> PeriodicConfiguration::segment(long start, std::size_t length, long translate) const {
    std::vector<double> out(length);
    for (std::size_t k = 0; k < length; ++k)
        out[k] = at(start + static_cast<long>(k)) + static_cast<double>(translate);
    return out;
}

double periodic_action(const GeneratingFamily& family, long p, std::span<const double> x) {
    double total = 0.0;
    for (long j = 0; j < static_cast<long>(x.size()); ++j) total += family.eval(point(x, p, j), point(x, p, j + 1));
    return total;
}

double smallest_hessian_eigenvalue(const GeneratingFamily& family, const PeriodicConfiguration& c) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(action_hessian(family, c.p, c.thetas));
    return eig.eigenvalues().minCoeff();
}

std::vector<PeriodicConfiguration> minimize_periodic(const GeneratingFamily& family, long p, long q,
                                                     std::size_t restarts, unsigned seed) {
    if (q < 1) throw std::invalid_argument("minimize_periodic: q must be >= 1");
    if (restarts < 1) throw std::invalid_argument("minimize_periodic: restarts must be >= 1");
    std::vector<std::optional<PeriodicConfiguration>> found(restarts);
    // Seeds are drawn up front so results do not depend on scheduling.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    std::vector<std::vector<double>> seeds(restarts, std::vector<double>(static_cast<std::size_t>(q)));
    for (std::size_t r = 0; r < restarts; ++r) {
        const double start = (static_cast<double>(r) + 0.5 + 0.5 * jitter(rng)) / static_cast<double>(restarts);
        for (long j = 0; j < q; ++j)
            seeds[r][static_cast<std::size_t>(j)] = start + static_cast<double>(j * p) / static_cast<double>(q) +
                                                     0.2 * jitter(rng) / static_cast<double>(q);
    }
    parallel_for(restarts, [&](std::size_t r) {
        std::vector<double> x = seeds[r];
        for (int sweep = 0; sweep < 20000; ++sweep) {
            for (long j = 0; j < q; ++j) minimize_slice(family, p, x, j);
            if (max_gradient(family, p, x) <= 1e-9) break;
        }
        newton_polish(family, p, x);
        const double g = max_gradient(family, p, x);
        if (g > 1e-8) return;  // stalled restart is dropped
        PeriodicConfiguration c;
        c.p = p;
        c.q = q;
        c.thetas = canonical(x, p);
        c.action = periodic_action(family, p, c.thetas);
        c.stationarity = max_gradient(family, p, c.thetas);
        found[r] = std::move(c);
    });
    std::vector<PeriodicConfiguration> out;
    for (auto& c : found)
        if (c) out.push_back(std::move(*c));
    if (out.empty()) throw NoDescentProgress("every restart stalled before reaching stationarity");
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.action != b.action ? a.action < b.action : a.thetas[0] < b.thetas[0];
    });
    std::vector<PeriodicConfiguration> unique;
    for (auto& c : out) {
        const bool seen = std::any_of(unique.begin(), unique.end(), [&](const auto& u) { return same_orbit(u, c); });
        if (!seen) unique.push_back(std::move(c));
    }
    return unique;
}

MatherSet mather_set(const GeneratingFamily& family, long p, long q, std::size_t restarts, unsigned seed) {
    MatherSet set;
    set.p = p;
    set.q = q;
    set.restarts = restarts;
    std::vector<PeriodicConfiguration> all = minimize_periodic(family, p, q, restarts, seed);
    set.min_action = all.front().action;
    for (auto& c : all)
        if (c.action <= set.min_action + 1e-8) set.orbits.push_back(std::move(c));
    if (set.orbits.size() >= 2) {
        set.continuum = std::all_of(set.orbits.begin(), set.orbits.end(), [&](const auto& c) {
            return smallest_hessian_eigenvalue(family, c) <= 1e-6;
        });
    }
    return set;
}

void MatherSet::write_json(std::ostream& out) const {
    nlohmann::json j;
    j["p"] = p;
    j["q"] = q;
    j["min_action"] = min_action;
    j["continuum"] = continuum;
    j["restarts"] = restarts;
    j["orbits"] = nlohmann::json::array();
    for (const auto& c : orbits)
        j["orbits"].push_back({{"thetas", c.thetas}, {"action", c.action}, {"stationarity", c.stationarity}});
    out << j.dump(2) << '\n';
}

int crossing_count(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("crossing_count: sequences differ in length");
    int count = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        if (std::abs(d) <= 1e-9) {
            ++count;
            continue;
        }
        if (k + 1 < a.size()) {
            const double e = a[k + 1] - b[k + 1];
            if (std::abs(e) > 1e-9 && (d > 0.0) != (e > 0.0)) ++count;
        }
    }
    return count;
}

}  // namespace weakkam
