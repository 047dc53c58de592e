#include "weakkam/twist_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "weakkam/errors.hpp"

namespace weakkam {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

TangentMatrix TangentMatrix::inverse() const {
    const double det_value = det();
    return {d / det_value, -b / det_value, -c / det_value, a / det_value};
}

std::array<double, 2> TangentMatrix::apply(std::array<double, 2> v) const {
    return {a * v[0] + b * v[1], c * v[0] + d * v[1]};
}

TangentMatrix operator*(const TangentMatrix& x, const TangentMatrix& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
}

double circle_offset(double x) { return x - std::floor(x + 0.5); }

// ---------------------------------------------------------------- profile

ConjugacyProfile::ConjugacyProfile(double beta, double gamma) : beta_(beta), gamma_(gamma) {
    if (std::numbers::pi * (std::abs(beta) + 2.0 * std::abs(gamma)) >= 1.0)
        throw std::invalid_argument("conjugated family: h = id + d must be a diffeomorphism");
    if (!(gamma > 0.0))
        throw std::invalid_argument("conjugated family: requires mean(d) > d(1/2)/2, i.e. gamma > 0");
}

double ConjugacyProfile::d(double t) const {
    const double s1 = std::sin(std::numbers::pi * t);
    const double s2 = std::sin(two_pi * t);
    return beta_ * s1 * s1 + gamma_ * s2 * s2;
}

double ConjugacyProfile::d_prime(double t) const {
    return std::numbers::pi * beta_ * std::sin(two_pi * t) +
           two_pi * gamma_ * std::sin(2.0 * two_pi * t);
}

double ConjugacyProfile::d_second(double t) const {
    return two_pi * std::numbers::pi * beta_ * std::cos(two_pi * t) +
           2.0 * two_pi * two_pi * gamma_ * std::cos(2.0 * two_pi * t);
}

double ConjugacyProfile::h_inv(double t) const {
    const double base = std::floor(t);
    const double target = t - base;
    // h(x) = x + d(x) with 0 <= d <= |beta| + |gamma|, so the root sits just left of target.
    const double spread = std::abs(beta_) + std::abs(gamma_);
    double lo = target - spread - 1e-3;
    double hi = target + spread + 1e-3;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (h(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return base + 0.5 * (lo + hi);
}

double ConjugacyProfile::h_inv_prime(double t) const { return 1.0 / h_prime(h_inv(t)); }

double ConjugacyProfile::h_inv_second(double t) const {
    const double x = h_inv(t);
    const double hp = h_prime(x);
    return -d_second(x) / (hp * hp * hp);
}

double ConjugacyProfile::weak_kam(double c, double theta) const { return -c * d(h_inv(theta)); }

double ConjugacyProfile::leaf(double c, double theta) const { return c * h_inv_prime(theta); }

double ConjugacyProfile::discounted_irrational(double c, double theta) const {
    return c * (mean_d() - d(h_inv(theta)));
}

// ---------------------------------------------------------------- family

struct GeneratingFamily::Model {
    FamilyKind kind = FamilyKind::integrable;
    std::string id;
    double k = 0.0;
    double kinetic = 1.0;
    std::optional<ConjugacyProfile> profile;
    double band = 4.0;
    double twist_bound = -1.0;
};

GeneratingFamily::GeneratingFamily(std::shared_ptr<const Model> model) : model_(std::move(model)) {}

namespace {

std::string format_param(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string kinetic_suffix(double kinetic, bool first) {
    if (kinetic == 1.0) return {};
    return std::string(first ? ":" : ",") + "kinetic=" + format_param(kinetic);
}

}  // namespace

GeneratingFamily GeneratingFamily::integrable(double kinetic) {
    auto m = std::make_shared<Model>();
    m->kind = FamilyKind::integrable;
    m->kinetic = kinetic;
    m->id = "integrable" + kinetic_suffix(kinetic, true);
    m->twist_bound = -kinetic;
    return GeneratingFamily(std::move(m));
}

GeneratingFamily GeneratingFamily::standard(double k, double kinetic) {
    auto m = std::make_shared<Model>();
    m->kind = FamilyKind::standard;
    m->k = k;
    m->kinetic = kinetic;
    m->id = "standard:k=" + format_param(k) + kinetic_suffix(kinetic, false);
    m->twist_bound = -kinetic;
    return GeneratingFamily(std::move(m));
}

GeneratingFamily GeneratingFamily::conjugated(double beta, double gamma, double kinetic) {
    auto m = std::make_shared<Model>();
    m->kind = FamilyKind::conjugated;
    m->kinetic = kinetic;
    m->profile.emplace(beta, gamma);
    m->id = "conjugated:beta=" + format_param(beta) + ",gamma=" + format_param(gamma) +
            kinetic_suffix(kinetic, false);
    double min_slope = 1e300;
    for (int i = 0; i < 4096; ++i)
        min_slope = std::min(min_slope, 1.0 / m->profile->h_prime(i / 4096.0));
    m->twist_bound = -kinetic * min_slope * min_slope;
    return GeneratingFamily(std::move(m));
}

GeneratingFamily GeneratingFamily::parse(std::string_view token) {
    const auto colon = token.find(':');
    const std::string name(token.substr(0, colon));
    std::map<std::string, double> params;
    if (colon != std::string_view::npos) {
        std::string_view rest = token.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos)
                throw std::invalid_argument("family parameter without '=': " + std::string(item));
            const std::string key(item.substr(0, eq));
            const std::string value(item.substr(eq + 1));
            std::size_t used = 0;
            double parsed = 0.0;
            try {
                parsed = std::stod(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != value.size() || value.empty())
                throw std::invalid_argument("bad numeric value for " + key + ": " + value);
            params[key] = parsed;
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    auto take = [&](const std::string& key, double fallback) {
        const auto it = params.find(key);
        if (it == params.end()) return fallback;
        const double v = it->second;
        params.erase(it);
        return v;
    };
    const double kinetic = take("kinetic", 1.0);
    GeneratingFamily result = [&] {
        if (name == "integrable") return integrable(kinetic);
        if (name == "standard") return standard(take("k", 0.9), kinetic);
        if (name == "conjugated") {
            const double beta = take("beta", 0.05);
            const double gamma = take("gamma", 0.05);
            return conjugated(beta, gamma, kinetic);
        }
        throw std::invalid_argument("unknown family: " + name);
    }();
    if (!params.empty())
        throw std::invalid_argument("unknown parameter for " + name + ": " + params.begin()->first);
    return result;
}

const std::string& GeneratingFamily::id() const { return model_->id; }
FamilyKind GeneratingFamily::kind() const { return model_->kind; }
std::string GeneratingFamily::token() const { return model_->id; }
double GeneratingFamily::band_r() const { return model_->band; }
double GeneratingFamily::root_window() const { return model_->band + 2.0; }
double GeneratingFamily::twist_upper_bound() const { return model_->twist_bound; }
double GeneratingFamily::coupling() const { return model_->k; }
double GeneratingFamily::kinetic() const { return model_->kinetic; }

const ConjugacyProfile* GeneratingFamily::conjugacy() const {
    return model_->profile ? &*model_->profile : nullptr;
}

double GeneratingFamily::eval(double t, double T) const {
    const Model& m = *model_;
    switch (m.kind) {
        case FamilyKind::integrable:
            return 0.5 * m.kinetic * (T - t) * (T - t);
        case FamilyKind::standard:
            return 0.5 * m.kinetic * (T - t) * (T - t) -
                   m.k / (two_pi * two_pi) * std::cos(two_pi * t);
        case FamilyKind::conjugated: {
            const double gap = m.profile->h_inv(T) - m.profile->h_inv(t);
            return 0.5 * m.kinetic * gap * gap;
        }
    }
    return 0.0;
}

double GeneratingFamily::d1(double t, double T) const {
    const Model& m = *model_;
    switch (m.kind) {
        case FamilyKind::integrable:
            return -m.kinetic * (T - t);
        case FamilyKind::standard:
            return -m.kinetic * (T - t) + m.k / two_pi * std::sin(two_pi * t);
        case FamilyKind::conjugated: {
            const auto& p = *m.profile;
            return -m.kinetic * (p.h_inv(T) - p.h_inv(t)) * p.h_inv_prime(t);
        }
    }
    return 0.0;
}

double GeneratingFamily::d2(double t, double T) const {
    const Model& m = *model_;
    switch (m.kind) {
        case FamilyKind::integrable:
        case FamilyKind::standard:
            return m.kinetic * (T - t);
        case FamilyKind::conjugated: {
            const auto& p = *m.profile;
            return m.kinetic * (p.h_inv(T) - p.h_inv(t)) * p.h_inv_prime(T);
        }
    }
    return 0.0;
}

double GeneratingFamily::d11(double t, double T) const {
    const Model& m = *model_;
    switch (m.kind) {
        case FamilyKind::integrable:
            return m.kinetic;
        case FamilyKind::standard:
            return m.kinetic + m.k * std::cos(two_pi * t);
        case FamilyKind::conjugated: {
            const auto& p = *m.profile;
            const double g1 = p.h_inv_prime(t);
            return m.kinetic * (g1 * g1 - (p.h_inv(T) - p.h_inv(t)) * p.h_inv_second(t));
        }
    }
    return 0.0;
}

double GeneratingFamily::d12(double t, double T) const {
    const Model& m = *model_;
    switch (m.kind) {
        case FamilyKind::integrable:
        case FamilyKind::standard:
            return -m.kinetic;
        case FamilyKind::conjugated: {
            const auto& p = *m.profile;
            return -m.kinetic * p.h_inv_prime(t) * p.h_inv_prime(T);
        }
    }
    return 0.0;
}

double GeneratingFamily::d22(double t, double T) const {
    const Model& m = *model_;
    switch (m.kind) {
        case FamilyKind::integrable:
        case FamilyKind::standard:
            return m.kinetic;
        case FamilyKind::conjugated: {
            const auto& p = *m.profile;
            const double g2 = p.h_inv_prime(T);
            return m.kinetic * (g2 * g2 + (p.h_inv(T) - p.h_inv(t)) * p.h_inv_second(T));
        }
    }
    return 0.0;
}

double GeneratingFamily::semiconcavity_bound(double span) const {
    if (model_->kind != FamilyKind::conjugated) return std::max(model_->kinetic, 0.0);
    double sup = 0.0;
    constexpr int samples = 64;
    for (int i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / samples;
        for (int j = 0; j <= samples; ++j) {
            const double T = t - span + 2.0 * span * j / samples;
            sup = std::max(sup, d22(t, T));
        }
    }
    return sup;
}

GeneratingFamily::GridKernel GeneratingFamily::grid_kernel(std::size_t n) const {
    GridKernel kernel;
    kernel.kind_ = model_->kind;
    kernel.n_ = n;
    kernel.kinetic_ = model_->kinetic;
    kernel.node_.resize(n);
    kernel.potential_.assign(n, 0.0);
    const double step = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = static_cast<double>(i) * step;
        switch (model_->kind) {
            case FamilyKind::integrable:
                kernel.node_[i] = theta;
                break;
            case FamilyKind::standard:
                kernel.node_[i] = theta;
                kernel.potential_[i] = -model_->k / (two_pi * two_pi) * std::cos(two_pi * theta);
                break;
            case FamilyKind::conjugated:
                kernel.node_[i] = model_->profile->h_inv(theta);
                break;
        }
    }
    return kernel;
}

double GeneratingFamily::GridKernel::operator()(std::size_t i, std::size_t j, int m) const {
    const double gap = node_[j] + static_cast<double>(m) - node_[i];
    return 0.5 * kinetic_ * gap * gap + potential_[i];
}

// ---------------------------------------------------------------- map

namespace {

// Root of an increasing function on [center - W, center + W], widening the window a few times.
template <class F, class DF>
double solve_increasing(F f, DF df, double guess, double center, double window) {
    double lo = center - window;
    double hi = center + window;
    double flo = f(lo);
    double fhi = f(hi);
    for (int widen = 0; widen < 4 && !(flo < 0.0 && fhi > 0.0); ++widen) {
        if (flo > fhi) throw NonMonotone("map solve: function decreases across the bracket");
        window *= 2.0;
        lo = center - window;
        hi = center + window;
        flo = f(lo);
        fhi = f(hi);
    }
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (!(flo < 0.0 && fhi > 0.0)) throw BracketFailure("map solve: no sign change in the window");
    double x = std::clamp(guess, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (fx < 0.0)
            lo = x;
        else
            hi = x;
        const double slope = df(x);
        if (!(slope > 0.0)) throw NonMonotone("map solve: twist sign test failed");
        double next = x - fx / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x)) || hi - lo <= 1e-15 * (1.0 + std::abs(x)))
            return next;
        x = next;
    }
    return x;
}

}  // namespace

LiftPoint forward_lift(const GeneratingFamily& family, LiftPoint p) {
    const double t = p.theta;
    const double r = p.r;
    const double T = solve_increasing([&](double x) { return -family.d1(t, x) - r; },
                                      [&](double x) { return -family.d12(t, x); }, t + r, t,
                                      family.root_window());
    return {T, family.d2(t, T)};
}

LiftPoint inverse_lift(const GeneratingFamily& family, LiftPoint p) {
    const double T = p.theta;
    const double R = p.r;
    const double t = solve_increasing([&](double x) { return R - family.d2(x, T); },
                                      [&](double x) { return -family.d12(x, T); }, T - R, T,
                                      family.root_window());
    return {t, -family.d1(t, T)};
}

MapPoint forward_map(const GeneratingFamily& family, MapPoint p) {
    const LiftPoint q = forward_lift(family, {p.theta, p.r});
    return {wrap01(q.theta), q.r};
}

MapPoint inverse_map(const GeneratingFamily& family, MapPoint p) {
    const LiftPoint q = inverse_lift(family, {p.theta, p.r});
    return {wrap01(q.theta), q.r};
}

TangentMatrix tangent_map(const GeneratingFamily& family, MapPoint p) {
    const LiftPoint image = forward_lift(family, {p.theta, p.r});
    const double s11 = family.d11(p.theta, image.theta);
    const double s12 = family.d12(p.theta, image.theta);
    const double s22 = family.d22(p.theta, image.theta);
    TangentMatrix m;
    m.a = -s11 / s12;
    m.b = -1.0 / s12;
    m.c = s12 + s22 * m.a;
    m.d = s22 * m.b;
    return m;
}

TwistCheckReport iterate_twist_check(const GeneratingFamily& family, int n, std::size_t samples,
                                     unsigned seed) {
    if (n < 1) throw std::invalid_argument("iterate_twist_check: n must be >= 1");
    TwistCheckReport report;
    report.iterates = n;
    report.samples = samples;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 1.0);
    const double r_max = family.band_r() / (2.0 * n);
    std::uniform_real_distribution<double> momentum(-r_max, r_max);
    constexpr double delta = 1e-6;
    auto project = [&](double theta, double r) {
        LiftPoint q{theta, r};
        for (int k = 0; k < n; ++k) q = forward_lift(family, q);
        return q.theta;
    };
    for (std::size_t s = 0; s < samples; ++s) {
        const MapPoint p{angle(rng), momentum(rng)};
        const double derivative =
            (project(p.theta, p.r + delta) - project(p.theta, p.r - delta)) / (2.0 * delta);
        if (!(derivative > 0.0)) report.violations.push_back({p, derivative});
    }
    return report;
}

}  // namespace weakkam
