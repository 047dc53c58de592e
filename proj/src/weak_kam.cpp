#include "weakkam/weak_kam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "weakkam/aubry_mather.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/io.hpp"
#include "weakkam/parallel.hpp"
#include "weakkam/pseudograph.hpp"

namespace weakkam {

namespace {

constexpr double infinity = std::numeric_limits<double>::infinity();

// Functional graph x -> policy[x] (predecessor of x) with per-edge gain b[x]; values satisfy
// v[x] = scale * v[policy[x]] + b[x] - offset[component], where offset is the cycle mean when
// scale == 1 and zero otherwise.
struct PolicyEvaluation {
    std::vector<double> value;
    std::vector<double> cycle_mean;  // per node: mean gain of the cycle its chain reaches
    std::vector<std::vector<std::size_t>> cycles;
    std::vector<std::size_t> cycle_of;  // per node: index into cycles
};

PolicyEvaluation evaluate_policy(const std::vector<std::size_t>& policy, const std::vector<double>& gain,
                                 double scale) {
    const std::size_t n = policy.size();
    PolicyEvaluation ev{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), {},
                        std::vector<std::size_t>(n, 0)};
    std::vector<char> state(n, 0);  // 0 unseen, 1 on current path, 2 done
    std::vector<std::size_t> path;
    for (std::size_t start = 0; start < n; ++start) {
        if (state[start] == 2) continue;
        path.clear();
        std::size_t cur = start;
        while (state[cur] == 0) {
            state[cur] = 1;
            path.push_back(cur);
            cur = policy[cur];
        }
        if (state[cur] == 1) {
            // New cycle: path[idx..] with policy[path[t]] == path[t + 1].
            const auto idx = static_cast<std::size_t>(std::find(path.begin(), path.end(), cur) - path.begin());
            std::vector<std::size_t> cycle(path.begin() + static_cast<std::ptrdiff_t>(idx), path.end());
            const std::size_t L = cycle.size();
            double mean = 0.0;
            double root = 0.0;
            if (scale == 1.0) {
                for (const std::size_t x : cycle) mean += gain[x];
                mean /= static_cast<double>(L);
            } else {
                // v(c_0) = sum_k scale^k b(c_k) / (1 - scale^L)
                double weight = 1.0;
                double sum = 0.0;
                for (const std::size_t x : cycle) {
                    sum += weight * gain[x];
                    weight *= scale;
                }
                root = sum / (1.0 - weight);
            }
            const std::size_t id = ev.cycles.size();
            ev.value[cycle[0]] = root;
            for (std::size_t k = L; k-- > 1;) {
                const std::size_t x = cycle[k];
                ev.value[x] = scale * ev.value[policy[x]] + gain[x] - mean;
            }
            for (const std::size_t x : cycle) {
                ev.cycle_mean[x] = mean;
                ev.cycle_of[x] = id;
                state[x] = 2;
            }
            ev.cycles.push_back(std::move(cycle));
            path.resize(idx);
        }
        while (!path.empty()) {
            const std::size_t x = path.back();
            path.pop_back();
            const std::size_t y = policy[x];
            ev.cycle_mean[x] = ev.cycle_mean[y];
            ev.cycle_of[x] = ev.cycle_of[y];
            ev.value[x] = scale * ev.value[y] + gain[x] - ev.cycle_mean[x];
            state[x] = 2;
        }
    }
    return ev;
}

std::vector<double> policy_gain(const CostMatrix& A, const std::vector<std::size_t>& policy, double shift) {
    std::vector<double> gain(policy.size());
    for (std::size_t x = 0; x < policy.size(); ++x) gain[x] = A(policy[x], x) + shift;
    return gain;
}

struct HowardResult {
    double mean = 0.0;  // minimal cycle mean of A
    std::vector<double> value;
};

// Policy iteration for the min-plus eigenproblem v(x) + mean = min_y v(y) + A(y, x).
HowardResult howard_min_mean(const CostMatrix& A, std::vector<std::size_t> policy) {
    const std::size_t n = A.size();
    constexpr double eps = 1e-12;
    PolicyEvaluation ev;
    for (std::size_t round = 0; round < 1000; ++round) {
        ev = evaluate_policy(policy, policy_gain(A, policy, 0.0), 1.0);
        const double best_mean = *std::min_element(ev.cycle_mean.begin(), ev.cycle_mean.end());
        bool changed = false;
        // Route chains of worse cycles into the best ones.
        std::vector<double> masked(n, infinity);
        for (std::size_t y = 0; y < n; ++y)
            if (ev.cycle_mean[y] <= best_mean + eps) masked[y] = ev.value[y];
        const ArgminResult best_reach = minplus_apply_argmin(masked, A, MinplusMode::monge);
        for (std::size_t x = 0; x < n; ++x) {
            if (ev.cycle_mean[x] > best_mean + eps && best_reach.values[x] < infinity) {
                policy[x] = best_reach.argmin[x];
                changed = true;
            }
        }
        if (changed) continue;
        const ArgminResult step = minplus_apply_argmin(ev.value, A, MinplusMode::monge);
        for (std::size_t x = 0; x < n; ++x) {
            if (step.values[x] - best_mean < ev.value[x] - eps * (1.0 + std::abs(ev.value[x]))) {
                policy[x] = step.argmin[x];
                changed = true;
            }
        }
        if (!changed) break;
    }
    HowardResult result;
    result.mean = *std::min_element(ev.cycle_mean.begin(), ev.cycle_mean.end());
    result.value = std::move(ev.value);
    return result;
}

// Lifted displacement of a cycle given in predecessor order; node offsets telescope to zero.
long cycle_winding(const CostMatrix& A, const std::vector<std::size_t>& cycle,
                   const std::vector<std::size_t>& policy) {
    long total = 0;
    for (const std::size_t x : cycle) total += A.shift(policy[x], x);
    return total;
}

double mean_on(const GridFunction& u, const std::vector<std::size_t>& nodes) {
    double sum = 0.0;
    for (const std::size_t x : nodes) sum += u[x];
    return sum / static_cast<double>(nodes.size());
}

PolicyEvaluation discounted_policy_iteration(const CostMatrix& A, double lambda, double shift,
                                             std::vector<std::size_t>& policy) {
    const std::size_t n = A.size();
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw std::invalid_argument("discounted_fixed_point: lambda must lie in [0, 1)");
    PolicyEvaluation ev;
    for (std::size_t round = 0; round < 1000; ++round) {
        ev = evaluate_policy(policy, policy_gain(A, policy, shift), lambda);
        const std::vector<double>& value = ev.value;
        std::vector<double> scaled(n);
        for (std::size_t y = 0; y < n; ++y) scaled[y] = lambda * value[y];
        const ArgminResult step = minplus_apply_argmin(scaled, A, MinplusMode::monge);
        bool changed = false;
        for (std::size_t x = 0; x < n; ++x) {
            if (step.values[x] + shift < value[x] - 1e-13 * (1.0 + std::abs(value[x]))) {
                policy[x] = step.argmin[x];
                changed = true;
            }
        }
        if (!changed) break;
    }
    return ev;
}

GridFunction discounted_fixed_point_from(const CostMatrix& A, double lambda, double shift,
                                         std::vector<std::size_t>& policy) {
    return GridFunction(discounted_policy_iteration(A, lambda, shift, policy).value);
}

std::size_t resolve_iters(const SolverOptions& o) { return o.max_iters ? o.max_iters : 50 * o.n_grid; }

int resolve_window(const SolverOptions& o, double c) { return o.window ? o.window : default_window(c); }

AlphaSolution solve_alpha_impl(const GeneratingFamily& family, double c, const SolverOptions& options,
                               bool cross_check) {
    auto cost = std::make_shared<const CostMatrix>(
        project_cost(family, c, options.n_grid, resolve_window(options, c)));
    const CostMatrix& A = *cost;
    const std::size_t n = A.size();
    const double tol = options.tol;
    const MinplusMode mode = MinplusMode::monge;

    // Max-normalized value iteration: u <- T u - max(T u), alpha = -max(T u).
    struct Iterate {
        GridFunction u;
        double alpha = 0.0;
        bool converged = false;
        std::size_t steps = 0;
        double bracket_low = -infinity;
        double bracket_high = infinity;
    };
    const auto run = [&](GridFunction u, std::size_t budget) {
        Iterate it;
        double previous = std::numeric_limits<double>::quiet_NaN();
        for (; it.steps < budget; ++it.steps) {
            GridFunction tu = minplus_apply(u, A, mode).values;
            double lo = infinity, hi = -infinity;
            for (std::size_t x = 0; x < n; ++x) {
                lo = std::min(lo, tu[x] - u[x]);
                hi = std::max(hi, tu[x] - u[x]);
            }
            it.bracket_low = -hi;
            it.bracket_high = -lo;
            const double top = tu.max();
            for (double& v : tu.values) v -= top;
            const double alpha = -top;
            const double delta = sup_distance(tu, u);
            u = std::move(tu);
            it.alpha = alpha;
            if (std::abs(alpha - previous) <= tol && delta <= tol) {
                it.converged = true;
                ++it.steps;
                break;
            }
            previous = alpha;
        }
        it.u = std::move(u);
        return it;
    };

    const std::size_t budget = resolve_iters(options);
    Iterate it = run(GridFunction::constant(n, 0.0), std::min(options.warm_iters, budget));
    std::size_t used = it.steps;
    if (!it.converged) {
        // Policy iteration seeded by the warm iterate supplies an eigenvector to restart from.
        const HowardResult howard = howard_min_mean(A, minplus_apply_argmin(it.u.values, A).argmin);
        GridFunction start(howard.value);
        const double top = start.max();
        for (double& v : start.values) v -= top;
        Iterate polished = run(std::move(start), budget - used);
        used += polished.steps;
        it = std::move(polished);
    }
    if (!it.converged) throw NoConvergence(it.bracket_low, it.bracket_high, used);

    AlphaSolution sol;
    sol.alpha = it.alpha;
    sol.u = std::move(it.u);
    sol.u.semiconcavity_K = family.semiconcavity_bound(A.window_used() + 1.0);
    sol.residual = fixed_point_residual(sol.u, A, sol.alpha);
    sol.iterations = used;
    // Cycles of the saturating policy of a fixed point are critical; keep the one of least mean.
    const std::vector<std::size_t> saturating = minplus_apply_argmin(sol.u.values, A).argmin;
    {
        const PolicyEvaluation ev = evaluate_policy(saturating, policy_gain(A, saturating, 0.0), 1.0);
        std::size_t best = 0;
        for (std::size_t k = 1; k < ev.cycles.size(); ++k)
            if (ev.cycle_mean[ev.cycles[k][0]] < ev.cycle_mean[ev.cycles[best][0]]) best = k;
        sol.critical_cycle = ev.cycles[best];
        sol.winding = cycle_winding(A, sol.critical_cycle, saturating);
    }
    if (cross_check) {
        // On each cycle C of the discounted policy, -(1 - lambda) mean_C u_lambda is the mean cost of C.
        const double lambda = 1.0 - std::ldexp(1.0, -10);
        std::vector<std::size_t> policy = saturating;
        const PolicyEvaluation ev = discounted_policy_iteration(A, lambda, 0.0, policy);
        const GridFunction u_lambda(ev.value);
        sol.discount_alpha = -infinity;
        for (const auto& cycle : ev.cycles)
            sol.discount_alpha = std::max(sol.discount_alpha, -(1.0 - lambda) * mean_on(u_lambda, cycle));
        sol.cross_check_passed = std::abs(sol.discount_alpha - sol.alpha) <= 10.0 * tol;
    }
    sol.cost = std::move(cost);
    return sol;
}

double alpha_only(const GeneratingFamily& family, double c, const SolverOptions& options) {
    return solve_alpha_impl(family, c, options, false).alpha;
}

}  // namespace

double fixed_point_residual(const GridFunction& u, const CostMatrix& A, double alpha) {
    const GridFunction tu = minplus_apply(u, A).values;
    double sup = 0.0;
    for (std::size_t x = 0; x < u.size(); ++x) sup = std::max(sup, std::abs(tu[x] + alpha - u[x]));
    return sup;
}

AlphaSolution solve_alpha(const GeneratingFamily& family, double c, const SolverOptions& options) {
    return solve_alpha_impl(family, c, options, true);
}

WeakKamSolution weak_kam_solution(const GeneratingFamily& family, double c, const SolverOptions& options) {
    AlphaSolution a = solve_alpha_impl(family, c, options, false);
    WeakKamSolution sol;
    sol.c = c;
    sol.alpha = a.alpha;
    const double anchor = a.u[0];
    for (double& v : a.u.values) v -= anchor;
    sol.u = std::move(a.u);
    sol.residual = fixed_point_residual(sol.u, *a.cost, sol.alpha);
    sol.domination_violation = check_dominated(sol.u, *a.cost, sol.alpha);
    sol.critical_cycle = std::move(a.critical_cycle);
    sol.winding = a.winding;
    sol.cost = std::move(a.cost);
    return sol;
}

double check_dominated(const GridFunction& u, const CostMatrix& A, double alpha) {
    if (u.size() != A.size()) throw std::invalid_argument("check_dominated: grid size mismatch");
    // max_x u(x) - min_y [u(y) + A(y, x)] - alpha
    const GridFunction tu = minplus_apply(u, A).values;
    double worst = -infinity;
    for (std::size_t x = 0; x < u.size(); ++x) worst = std::max(worst, u[x] - tu[x] - alpha);
    return worst;
}

double check_dominated(const GridFunction& u, const GeneratingFamily& family, double c, double alpha) {
    return check_dominated(u, project_cost(family, c, u.size()), alpha);
}

double rho_of_c(const GeneratingFamily& family, double c, RhoMethod method, const SolverOptions& solver,
                const RhoOptions& options) {
    if (method == RhoMethod::alpha_derivative) {
        const double up = alpha_only(family, c + options.h, solver);
        const double down = alpha_only(family, c - options.h, solver);
        return (up - down) / (2.0 * options.h);
    }
    const WeakKamSolution sol = weak_kam_solution(family, c, solver);
    const Pseudograph graph = full_pseudograph(c, sol.u);
    return circle_map(family, graph).rotation_number(options.orbit_steps);
}

RotationEstimate rotation_number(const GeneratingFamily& family, double c, const SolverOptions& solver,
                                 const RhoOptions& options) {
    RotationEstimate est;
    est.from_alpha = rho_of_c(family, c, RhoMethod::alpha_derivative, solver, options);
    est.from_orbit = rho_of_c(family, c, RhoMethod::orbit, solver, options);
    if (std::abs(est.from_alpha - est.from_orbit) > options.agreement)
        throw MethodDisagreement(est.from_alpha, est.from_orbit);
    return est;
}

GridFunction discounted_fixed_point(const CostMatrix& A, double lambda, double shift) {
    std::vector<std::size_t> policy = minplus_apply_argmin(std::vector<double>(A.size(), 0.0), A).argmin;
    return discounted_fixed_point_from(A, lambda, shift, policy);
}

DiscountedSolution discounted_solution(const GeneratingFamily& family, double c, const DiscountOptions& options) {
    std::vector<double> lambdas = options.lambdas;
    if (lambdas.empty())
        for (int k = 4; k <= 12; ++k) lambdas.push_back(1.0 - std::ldexp(1.0, -k));
    std::sort(lambdas.begin(), lambdas.end());
    if (lambdas.size() < 3) throw std::invalid_argument("discounted_solution: need at least three discounts");

    const AlphaSolution a = solve_alpha_impl(family, c, options.solver, false);
    const CostMatrix& A = *a.cost;
    const std::size_t n = A.size();

    DiscountedSolution out;
    out.c = c;
    out.alpha = a.alpha;
    out.lambdas = lambdas;
    std::vector<std::size_t> policy = minplus_apply_argmin(std::vector<double>(n, 0.0), A).argmin;
    for (const double lambda : lambdas)
        out.fixed_points.push_back(discounted_fixed_point_from(A, lambda, a.alpha, policy));

    // Linear extrapolation in (1 - lambda) from consecutive pairs.
    const auto extrapolate = [&](std::size_t k) {
        const double e0 = 1.0 - lambdas[k];
        const double e1 = 1.0 - lambdas[k + 1];
        std::vector<double> v(n);
        for (std::size_t x = 0; x < n; ++x)
            v[x] = (e0 * out.fixed_points[k + 1][x] - e1 * out.fixed_points[k][x]) / (e0 - e1);
        return GridFunction(std::move(v));
    };
    const std::size_t last = lambdas.size() - 2;
    GridFunction limit = extrapolate(last);
    const GridFunction previous = extrapolate(last - 1);
    out.extrapolation_jump = sup_distance(limit, previous);
    const double slack = first_order_slack(n);
    if (out.extrapolation_jump > 10.0 * slack) throw ExtrapolationUnstable(out.extrapolation_jump, 10.0 * slack);
    limit.semiconcavity_K = family.semiconcavity_bound(A.window_used() + 1.0);
    out.limit = std::move(limit);
    out.mather_integral = mean_on(out.limit, a.critical_cycle);
    out.mather_check_passed = out.mather_integral <= slack;
    return out;
}

std::optional<std::pair<long, long>> rational_fit(double x, int q_max, double tol, double c_for_report) {
    if (q_max < 1) throw std::invalid_argument("rational_fit: q_max must be >= 1");
    std::optional<std::pair<long, long>> found;
    long p2 = 0, p1 = 1, q2 = 1, q1 = 0;
    double r = x;
    for (int step = 0; step < 64; ++step) {
        const double a = std::floor(r);
        const long p = static_cast<long>(a) * p1 + p2;
        const long q = static_cast<long>(a) * q1 + q2;
        if (q > q_max) break;
        if (std::abs(x - static_cast<double>(p) / static_cast<double>(q)) <= tol) {
            found = std::make_pair(p, q);
            break;
        }
        p2 = p1;
        p1 = p;
        q2 = q1;
        q1 = q;
        const double frac = r - a;
        if (frac < 1e-15) break;
        r = 1.0 / frac;
    }
    // Any other fit with small denominator makes the detection ambiguous.
    for (long q = 1; q <= q_max; ++q) {
        const long p = std::lround(x * static_cast<double>(q));
        if (std::abs(x - static_cast<double>(p) / static_cast<double>(q)) > tol) continue;
        const long g = std::gcd(p, q);
        const std::pair<long, long> reduced{p / g, q / g};
        if (!found) found = reduced;
        else if (reduced != *found)
            throw PlateauDetectionAmbiguous(c_for_report, found->first, found->second, reduced.first,
                                            reduced.second);
    }
    return found;
}

double SelectionSurface::du_dc(std::size_t row, std::size_t node) const {
    if (row < interior_du_dc.size() && interior_du_dc[row].size() > 0) return interior_du_dc[row][node];
    const std::size_t m = rows.size();
    if (m < 2) return 0.0;
    const std::size_t lo = row == 0 ? 0 : row - 1;
    const std::size_t hi = row + 1 == m ? row : row + 1;
    return (rows[hi].u[node] - rows[lo].u[node]) / (c_grid[hi] - c_grid[lo]);
}

double SelectionSurface::du_dtheta(std::size_t row, std::size_t node) const {
    const GridFunction& u = rows[row].u;
    const std::size_t n = u.size();
    return (u[(node + 1) % n] - u[(node + n - 1) % n]) * static_cast<double>(n) / 2.0;
}

void SelectionSurface::write_csv(std::ostream& out) const {
    out << "c,theta,u,du_dtheta,du_dc\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const GridFunction& u = rows[r].u;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double fields[] = {c_grid[r], u.node(i), u[i], du_dtheta(r, i), du_dc(r, i)};
            write_csv_row(out, fields);
        }
    }
}

void SelectionSurface::write_summary_json(std::ostream& out) const {
    nlohmann::json j;
    j["n_grid"] = n_grid();
    j["c"] = c_grid;
    std::vector<double> alpha, residual;
    for (const auto& row : rows) {
        alpha.push_back(row.alpha);
        residual.push_back(row.residual);
    }
    j["alpha"] = alpha;
    j["rho"] = rho;
    j["residual"] = residual;
    j["plateaus"] = nlohmann::json::array();
    for (const auto& p : plateaus)
        j["plateaus"].push_back({{"p", p.p}, {"q", p.q}, {"a1", p.a1}, {"a2", p.a2},
                                 {"first_row", p.first_row}, {"last_row", p.last_row}});
    out << j.dump(2) << '\n';
}

SelectionSurface build_selection(const GeneratingFamily& family, double c_min, double c_max, std::size_t n_c,
                                 const SelectionOptions& options) {
    if (options.q_max < 1) throw std::invalid_argument("build_selection: q_max must be >= 1");
    if (n_c < 16) throw std::invalid_argument("build_selection: need at least 16 rows");
    if (!(c_max > c_min)) throw std::invalid_argument("build_selection: empty c range");
    SelectionSurface s;
    s.c_grid.resize(n_c);
    for (std::size_t r = 0; r < n_c; ++r)
        s.c_grid[r] = c_min + (c_max - c_min) * static_cast<double>(r) / static_cast<double>(n_c - 1);
    s.rows.resize(n_c);
    s.rho.resize(n_c);
    s.plateau_interior.assign(n_c, false);
    s.interior_du_dc.assign(n_c, GridFunction{});

    parallel_for(n_c, [&](std::size_t r) {
        s.rows[r] = weak_kam_solution(family, s.c_grid[r], options.solver);
        s.rho[r] = rho_of_c(family, s.c_grid[r], RhoMethod::alpha_derivative, options.solver, options.rho);
    });

    // Runs of rows whose rotation number fits the same rational.
    std::vector<std::optional<std::pair<long, long>>> fit(n_c);
    for (std::size_t r = 0; r < n_c; ++r)
        fit[r] = rational_fit(s.rho[r], options.q_max, options.plateau_tol, s.c_grid[r]);
    for (std::size_t r = 0; r < n_c;) {
        std::size_t end = r + 1;
        if (fit[r])
            while (end < n_c && fit[end] == fit[r]) ++end;
        if (fit[r] && end - r - 1 >= options.min_plateau_steps) {
            Plateau p;
            p.p = fit[r]->first;
            p.q = fit[r]->second;
            p.first_row = r;
            p.last_row = end - 1;
            p.a1 = s.c_grid[r];
            p.a2 = s.c_grid[end - 1];
            s.plateaus.push_back(p);
        }
        r = end;
    }

    // Plateau interiors: convex combination of the endpoint solutions on the Mather set,
    // extended by the Mane potential.
    const std::size_t n = options.solver.n_grid;
    for (Plateau& p : s.plateaus) {
        const MatherSet mather = mather_set(family, p.p, p.q, 5, options.seed);
        std::vector<std::size_t> nodes;
        for (const auto& orbit : mather.orbits)
            for (const double theta : orbit.thetas)
                nodes.push_back(static_cast<std::size_t>(std::lround(wrap01(theta) * static_cast<double>(n))) % n);
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        p.mather_nodes = nodes;
        const GridFunction& u1 = s.rows[p.first_row].u;
        const GridFunction& u2 = s.rows[p.last_row].u;
        parallel_for(p.last_row - p.first_row + 1, [&](std::size_t k) {
            const std::size_t r = p.first_row + k;
            if (r == p.first_row || r == p.last_row) return;
            WeakKamSolution& row = s.rows[r];
            const double weight = (p.a2 - row.c) / (p.a2 - p.a1);
            const auto paths = mane_paths(*row.cost, row.alpha, row.u.values, nodes);
            // Envelope derivative in c at the minimizing source and path; alpha' = p / q on the plateau.
            const double rho = static_cast<double>(p.p) / static_cast<double>(p.q);
            std::vector<double> U(n, infinity), dU(n, 0.0);
            for (std::size_t m = 0; m < nodes.size(); ++m) {
                const double v = weight * u1[nodes[m]] + (1.0 - weight) * u2[nodes[m]];
                const double dv = (u2[nodes[m]] - u1[nodes[m]]) / (p.a2 - p.a1);
                for (std::size_t x = 0; x < n; ++x) {
                    const double candidate = v + paths[m].phi[x];
                    if (candidate < U[x]) {
                        U[x] = candidate;
                        dU[x] = dv + paths[m].c_slope[x] + rho * static_cast<double>(paths[m].steps[x]);
                    }
                }
            }
            const double anchor = U[0], d_anchor = dU[0];
            for (double& v : U) v -= anchor;
            for (double& v : dU) v -= d_anchor;
            row.u = GridFunction(std::move(U), row.u.semiconcavity_K);
            s.interior_du_dc[r] = GridFunction(std::move(dU));
            row.residual = fixed_point_residual(row.u, *row.cost, row.alpha);
            row.domination_violation = check_dominated(row.u, *row.cost, row.alpha);
            s.plateau_interior[r] = true;
        });
    }
    return s;
}

}  // namespace weakkam
