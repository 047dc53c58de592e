#include "weakkam/minplus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>

#include "weakkam/errors.hpp"
#include "weakkam/io.hpp"
#include "weakkam/parallel.hpp"

namespace weakkam {

namespace {
constexpr double infinity = std::numeric_limits<double>::infinity();
}

double GridFunction::at(double theta) const {
    const std::size_t n = values.size();
    const double x = wrap01(theta) * static_cast<double>(n);
    const auto i = std::min(static_cast<std::size_t>(x), n - 1);
    const double frac = x - static_cast<double>(i);
    return (1.0 - frac) * values[i] + frac * values[(i + 1) % n];
}

double GridFunction::max() const { return *std::max_element(values.begin(), values.end()); }
double GridFunction::min() const { return *std::min_element(values.begin(), values.end()); }

double sup_distance(const GridFunction& a, const GridFunction& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sup_distance: grid size mismatch");
    double sup = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
    return sup;
}

int default_window(double c) { return static_cast<int>(std::ceil(std::abs(c))) + 3; }

double CostMatrix::block(std::size_t i, std::size_t j, int m) const {
    const double offset =
        (static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(n_) -
        static_cast<double>(m);
    return kernel_(i, j, m) + c_ * offset;
}

void CostMatrix::write_csv(std::ostream& out) const {
    out << "c,n,window\n";
    out << format_double(c_) << ',' << n_ << ',' << window_ << '\n';
    for (std::size_t i = 0; i < n_; ++i) write_csv_row(out, row(i));
}

bool certify_monge(const CostMatrix& A, std::size_t samples_per_block, unsigned seed) {
    const std::size_t n = A.size();
    if (n < 2) return true;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 2);
    const int window = A.window_used();
    for (int m = -window; m <= window; ++m) {
        for (std::size_t s = 0; s < samples_per_block; ++s) {
            std::size_t i = pick(rng);
            std::size_t j = pick(rng);
            std::size_t i2 = i + 1;
            std::size_t j2 = j + 1;
            if (s % 2 == 1) {  // wide quadruples on odd samples, adjacent ones on even samples
                i2 = i + 1 + pick(rng) % (n - 1 - i);
                j2 = j + 1 + pick(rng) % (n - 1 - j);
            }
            const double lhs = A.block(i, j, m) + A.block(i2, j2, m);
            const double rhs = A.block(i, j2, m) + A.block(i2, j, m);
            if (lhs > rhs + 1e-12) return false;
        }
    }
    return true;
}

CostMatrix project_cost(const GeneratingFamily& family, double c, std::size_t n, int window) {
    if (window < 1) throw std::invalid_argument("project_cost: window must be >= 1");
    if (window > 127) throw std::invalid_argument("project_cost: window too large");
    if (n < 2) throw std::invalid_argument("project_cost: need at least two nodes");
    auto kernel = family.grid_kernel(n);
    std::vector<double> values(n * n);
    std::vector<std::int8_t> shifts(n * n);
    // Temporary view used to evaluate blocks with the exact arithmetic of CostMatrix::block.
    const CostMatrix probe(n, c, window, {}, {}, kernel, false);
    std::vector<std::size_t> bad_col(n, n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            double best = infinity;
            int best_m = 0;
            for (int m = -window; m <= window; ++m) {
                const double v = probe.block(i, j, m);
                if (v < best) {
                    best = v;
                    best_m = m;
                }
            }
            values[i * n + j] = best;
            shifts[i * n + j] = static_cast<std::int8_t>(best_m);
            if (std::abs(best_m) >= window && bad_col[i] == n) bad_col[i] = j;
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        if (bad_col[i] != n) throw WindowTooSmall(i, bad_col[i], window);
    const bool certified = certify_monge(probe, 256);
    return CostMatrix(n, c, window, std::move(values), std::move(shifts), std::move(kernel),
                      certified);
}

namespace {

// SMAWK row minima of a totally monotone implicit matrix f(row, col); leftmost minima.
template <class F>
void smawk(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols, const F& f,
           std::vector<std::size_t>& argmin) {
    if (rows.empty()) return;
    std::vector<std::size_t> stack;
    stack.reserve(rows.size());
    for (const std::size_t col : cols) {
        while (!stack.empty()) {
            const std::size_t row = rows[stack.size() - 1];
            if (f(row, stack.back()) <= f(row, col)) break;
            stack.pop_back();
        }
        if (stack.size() < rows.size()) stack.push_back(col);
    }
    std::vector<std::size_t> odd_rows;
    odd_rows.reserve(rows.size() / 2);
    for (std::size_t k = 1; k < rows.size(); k += 2) odd_rows.push_back(rows[k]);
    smawk(odd_rows, stack, f, argmin);
    std::size_t start = 0;
    for (std::size_t k = 0; k < rows.size(); k += 2) {
        const std::size_t row = rows[k];
        std::size_t stop = stack.size() - 1;
        if (k + 1 < rows.size()) {
            const auto it = std::lower_bound(stack.begin(), stack.end(), argmin[rows[k + 1]]);
            stop = static_cast<std::size_t>(it - stack.begin());
        }
        std::size_t best = start;
        double best_value = f(row, stack[start]);
        for (std::size_t pos = start + 1; pos <= stop; ++pos) {
            const double v = f(row, stack[pos]);
            if (v < best_value) {
                best_value = v;
                best = pos;
            }
        }
        argmin[row] = stack[best];
        start = stop;
    }
}

std::vector<double> brute_apply(std::span<const double> u, const CostMatrix& A) {
    const std::size_t n = A.size();
    std::vector<double> out(n, infinity);
    for (std::size_t i = 0; i < n; ++i) {
        const double ui = u[i];
        const auto row = A.row(i);
        for (std::size_t j = 0; j < n; ++j) out[j] = std::min(out[j], ui + row[j]);
    }
    return out;
}

}  // namespace

MinplusResult minplus_apply(const GridFunction& u, const CostMatrix& A, MinplusMode mode) {
    if (u.size() != A.size()) throw std::invalid_argument("minplus_apply: size mismatch");
    const std::size_t n = A.size();
    MinplusResult result;
    if (mode == MinplusMode::brute || !A.monge_certified()) {
        result.values = GridFunction(brute_apply(u.values, A));
        result.monge_fallback = mode == MinplusMode::monge;
        return result;
    }
    std::vector<double> out(n, infinity);
    std::vector<std::size_t> index(n);
    for (std::size_t k = 0; k < n; ++k) index[k] = k;
    std::vector<std::size_t> argmin(n, 0);
    for (int m = -A.window_used(); m <= A.window_used(); ++m) {
        // Rows are target nodes j, columns are source nodes i.
        const auto f = [&](std::size_t j, std::size_t i) { return u.values[i] + A.block(i, j, m); };
        smawk(index, index, f, argmin);
        for (std::size_t j = 0; j < n; ++j) out[j] = std::min(out[j], f(j, argmin[j]));
    }
    result.values = GridFunction(std::move(out));
    return result;
}

ArgminResult minplus_apply_argmin(std::span<const double> u, const CostMatrix& A, MinplusMode mode) {
    const std::size_t n = A.size();
    ArgminResult result{std::vector<double>(n, infinity), std::vector<std::size_t>(n, 0)};
    if (mode == MinplusMode::monge && A.monge_certified()) {
        std::vector<std::size_t> index(n);
        for (std::size_t k = 0; k < n; ++k) index[k] = k;
        std::vector<std::size_t> argmin(n, 0);
        for (int m = -A.window_used(); m <= A.window_used(); ++m) {
            const auto f = [&](std::size_t j, std::size_t i) { return u[i] + A.block(i, j, m); };
            smawk(index, index, f, argmin);
            for (std::size_t j = 0; j < n; ++j) {
                const double v = f(j, argmin[j]);
                if (v < result.values[j]) {
                    result.values[j] = v;
                    result.argmin[j] = argmin[j];
                }
            }
        }
        return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double ui = u[i];
        const auto row = A.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double v = ui + row[j];
            if (v < result.values[j]) {
                result.values[j] = v;
                result.argmin[j] = i;
            }
        }
    }
    return result;
}

namespace {

// C = P (x) A + shift in the min-plus sense.
std::vector<double> minplus_product(std::span<const double> P, const CostMatrix& A, double shift) {
    const std::size_t n = A.size();
    std::vector<double> C(n * n, infinity);
    parallel_for(n, [&](std::size_t i) {
        double* out = C.data() + i * n;
        for (std::size_t k = 0; k < n; ++k) {
            const double pik = P[i * n + k];
            const auto row = A.row(k);
            for (std::size_t j = 0; j < n; ++j) out[j] = std::min(out[j], pik + row[j]);
        }
        for (std::size_t j = 0; j < n; ++j) out[j] += shift;
    });
    return C;
}

}  // namespace

CostMatrix nstep_cost(const GeneratingFamily& family, double c, std::size_t n_grid, int steps) {
    if (steps < 1) throw std::invalid_argument("nstep_cost: steps must be >= 1");
    CostMatrix A = project_cost(family, c, n_grid);
    if (steps == 1) return A;
    std::vector<double> P(A.values().begin(), A.values().end());
    for (int s = 1; s < steps; ++s) P = minplus_product(P, A, 0.0);
    return CostMatrix(n_grid, c, A.window_used(), std::move(P), {}, A.kernel(), false);
}

ManePotential mane_potential(const GeneratingFamily& family, double c, double alpha,
                             std::size_t n_grid, int n_max, int stall) {
    if (n_max < 1 || stall < 1) throw std::invalid_argument("mane_potential: bad step limits");
    const CostMatrix A = project_cost(family, c, n_grid);
    const std::size_t total = n_grid * n_grid;
    std::vector<double> P(A.values().begin(), A.values().end());
    for (double& v : P) v += alpha;
    std::vector<double> phi = P;
    int quiet = 0;
    int step = 1;
    bool stabilized = false;
    for (; step < n_max; ++step) {
        P = minplus_product(P, A, alpha);
        double improvement = 0.0;
        for (std::size_t k = 0; k < total; ++k) {
            if (P[k] < phi[k]) {
                improvement = std::max(improvement, phi[k] - P[k]);
                phi[k] = P[k];
            }
        }
        quiet = improvement <= 1e-13 ? quiet + 1 : 0;
        if (quiet >= stall) {
            stabilized = true;
            ++step;
            break;
        }
    }
    ManePotential result;
    result.phi = CostMatrix(n_grid, c, A.window_used(), std::move(phi), {}, A.kernel(), false);
    result.steps_used = step;
    result.stabilized = stabilized;
    return result;
}

std::vector<ManeRow> mane_paths(const CostMatrix& A, double alpha, std::span<const double> fixed_point,
                                std::span<const std::size_t> sources) {
    const std::size_t n = A.size();
    const double nd = static_cast<double>(n);
    // d/dc of the edge cost z -> x at its minimizing lift.
    const auto edge_slope = [&](std::size_t z, std::size_t x) {
        return (static_cast<double>(z) - static_cast<double>(x)) / nd - static_cast<double>(A.shift(z, x));
    };
    std::vector<ManeRow> rows(sources.size());
    parallel_for(sources.size(), [&](std::size_t s) {
        const std::size_t y = sources[s];
        std::vector<double> dist(n, infinity), slope(n, 0.0);
        std::vector<std::size_t> steps(n, 0);
        std::vector<char> done(n, 0);
        dist[y] = 0.0;
        for (std::size_t round = 0; round < n; ++round) {
            std::size_t z = n;
            double best = infinity;
            for (std::size_t k = 0; k < n; ++k)
                if (!done[k] && dist[k] < best) {
                    best = dist[k];
                    z = k;
                }
            if (z == n) break;
            done[z] = 1;
            const auto row = A.row(z);
            for (std::size_t x = 0; x < n; ++x) {
                if (done[x]) continue;
                const double reduced = std::max(0.0, row[x] + alpha + fixed_point[z] - fixed_point[x]);
                const double candidate = dist[z] + reduced;
                if (candidate < dist[x]) {
                    dist[x] = candidate;
                    slope[x] = slope[z] + edge_slope(z, x);
                    steps[x] = steps[z] + 1;
                }
            }
        }
        // Back to true costs; the diagonal needs at least one step.
        ManeRow out;
        out.phi.resize(n);
        for (std::size_t x = 0; x < n; ++x) out.phi[x] = dist[x] - fixed_point[y] + fixed_point[x];
        double loop = infinity;
        std::size_t via = y;
        for (std::size_t z = 0; z < n; ++z) {
            const double candidate = out.phi[z] + A(z, y) + alpha;
            if (candidate < loop) {
                loop = candidate;
                via = z;
            }
        }
        out.phi[y] = loop;
        const double loop_slope = slope[via] + edge_slope(via, y);
        const std::size_t loop_steps = steps[via] + 1;
        slope[y] = loop_slope;
        steps[y] = loop_steps;
        out.c_slope = std::move(slope);
        out.steps = std::move(steps);
        rows[s] = std::move(out);
    });
    return rows;
}

std::vector<std::vector<double>> mane_rows(const CostMatrix& A, double alpha,
                                           std::span<const double> fixed_point,
                                           std::span<const std::size_t> sources) {
    std::vector<std::vector<double>> rows;
    for (auto& r : mane_paths(A, alpha, fixed_point, sources)) rows.push_back(std::move(r.phi));
    return rows;
}

}  // namespace weakkam
