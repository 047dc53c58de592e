// Command-line front end: alpha curves, selection surfaces, pseudographs, Mather sets, Green slopes,
// foliation checks and the acceptance suite.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "weakkam/acceptance.hpp"
#include "weakkam/aubry_mather.hpp"
#include "weakkam/errors.hpp"
#include "weakkam/foliation.hpp"
#include "weakkam/green.hpp"
#include "weakkam/io.hpp"
#include "weakkam/parallel.hpp"
#include "weakkam/pseudograph.hpp"
#include "weakkam/weak_kam.hpp"

#ifndef WEAKKAM_VERSION
#define WEAKKAM_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace weakkam;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_fail = 1;
constexpr int exit_no_convergence = 2;
constexpr int exit_bad_config = 3;

struct RunConfig {
    std::string family = "standard:k=0.9";
    std::size_t n = 1024;
    double c_min = -1.0;
    double c_max = 1.0;
    std::size_t n_c = 41;
    double tol = 1e-9;
    double plateau_tol = 1e-6;
    double c1_tol = 1e-3;
    double mono_tol = 1e-3;
    int window = 0;
    std::size_t max_iters = 0;
    int q_max = 8;
    unsigned seed = 1;
    std::string out = "weakkam_out";
    std::string format = "csv";
    std::string only;

    void validate() const {
        if (!(tol > 0 && plateau_tol > 0 && c1_tol > 0 && mono_tol > 0))
            throw std::invalid_argument("tolerances must be positive");
        if (n < 256 || n > 16384 || (n & (n - 1)) != 0)
            throw std::invalid_argument("n must be a power of two between 256 and 16384");
        if (!(c_max > c_min)) throw std::invalid_argument("c-max must exceed c-min");
        if (n_c < 2) throw std::invalid_argument("n-c must be at least 2");
        if (window < 0) throw std::invalid_argument("window must be non-negative");
        if (q_max < 1) throw std::invalid_argument("q-max must be positive");
        if (format != "csv" && format != "json") throw std::invalid_argument("format must be csv or json");
    }

    [[nodiscard]] SolverOptions solver() const {
        SolverOptions o;
        o.n_grid = n;
        o.tol = tol;
        o.window = window;
        o.max_iters = max_iters;
        return o;
    }

    [[nodiscard]] json to_json() const {
        return {{"family", family}, {"n", n},           {"c_min", c_min},     {"c_max", c_max},
                {"n_c", n_c},       {"tol", tol},       {"plateau_tol", plateau_tol}, {"c1_tol", c1_tol},
                {"mono_tol", mono_tol}, {"window", window}, {"max_iters", max_iters}, {"q_max", q_max}, {"seed", seed},
                {"out", out},       {"format", format}, {"only", only}};
    }
};

// Output directory plus the list of files written, echoed in the manifest.
class Outputs {
public:
    explicit Outputs(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    std::ofstream open(const std::string& name) {
        files_.push_back(name);
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        f.imbue(std::locale::classic());
        return f;
    }

    void write_manifest(const std::string& command, const RunConfig& config, const json& extra, double seconds,
                        int exit_code) {
        json m;
        m["command"] = command;
        m["config"] = config.to_json();
        m["versions"] = {{"weakkam", WEAKKAM_VERSION},
                         {"compiler", __VERSION__},
                         {"cli11", CLI11_VERSION},
                         {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                               std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
        m["threads"] = worker_count();
        m["wall_seconds"] = seconds;
        m["exit_code"] = exit_code;
        m["outputs"] = files_;
        if (!extra.is_null()) m["result"] = extra;
        std::ofstream f(dir_ / "manifest.json");
        f << m.dump(2) << "\n";
    }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

std::vector<double> c_grid(const RunConfig& config) {
    std::vector<double> c(config.n_c);
    for (std::size_t i = 0; i < config.n_c; ++i)
        c[i] = config.c_min + (config.c_max - config.c_min) * static_cast<double>(i) / static_cast<double>(config.n_c - 1);
    return c;
}

struct CommandResult {
    int code = exit_ok;
    json summary;
};

CommandResult cmd_alpha_curve(const RunConfig& config, Outputs& out) {
    const auto family = GeneratingFamily::parse(config.family);
    const auto c = c_grid(config);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> alpha(c.size(), nan);
    std::vector<double> rho(c.size(), nan);
    std::vector<double> failed;
    for (std::size_t i = 0; i < c.size(); ++i) {
        try {
            alpha[i] = solve_alpha(family, c[i], config.solver()).alpha;
            rho[i] = rho_of_c(family, c[i], RhoMethod::alpha_derivative, config.solver());
        } catch (const NoConvergence& e) {
            failed.push_back(c[i]);
            std::cerr << "no convergence at c = " << format_double(c[i]) << ": " << e.what() << "\n";
        }
    }
    if (config.format == "json") {
        out.open("alpha.json") << json{{"family", family.token()}, {"c", c}, {"alpha", alpha}, {"rho", rho}}.dump(2)
                               << "\n";
    } else {
        auto f = out.open("alpha.csv");
        f << "c,alpha,rho\n";
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double row[] = {c[i], alpha[i], rho[i]};
            write_csv_row(f, row);
        }
    }
    out.open("alpha.gp") << "set datafile separator ','\n"
                            "set key autotitle columnhead\n"
                            "set xlabel 'c'\n"
                            "set multiplot layout 2,1\n"
                            "plot 'alpha.csv' using 1:2 with lines title 'alpha'\n"
                            "plot 'alpha.csv' using 1:3 with lines title 'rho'\n"
                            "unset multiplot\n";
    CommandResult r;
    r.summary = {{"points", c.size()}, {"failed_c", failed}};
    if (!failed.empty()) {
        std::cerr << "failing classes:";
        for (double x : failed) std::cerr << " " << format_double(x);
        std::cerr << "\n";
        r.code = exit_no_convergence;
    }
    return r;
}

CommandResult cmd_surface(const RunConfig& config, Outputs& out) {
    SelectionOptions o;
    o.solver = config.solver();
    o.q_max = config.q_max;
    o.plateau_tol = config.plateau_tol;
    o.seed = config.seed;
    const auto s = build_selection(GeneratingFamily::parse(config.family), config.c_min, config.c_max, config.n_c, o);
    {
        auto f = out.open("surface.csv");
        s.write_csv(f);
    }
    {
        auto f = out.open("plateaus.json");
        s.write_summary_json(f);
    }
    CommandResult r;
    r.summary = {{"rows", s.rows.size()}, {"plateaus", s.plateaus.size()}};
    return r;
}

CommandResult cmd_verify(const RunConfig& config, Outputs& out) {
    AcceptanceOptions o;
    o.n_grid = config.n;
    o.family = GeneratingFamily::parse(config.family);
    o.only = config.only;
    o.seed = config.seed;
    const auto results = run_acceptance(o);
    std::size_t failed = 0;
    json rows = json::array();
    std::cout << "criterion, expected, got, tolerance, verdict\n";
    for (const auto& r : results) {
        std::cout << format_result_line(r) << std::endl;
        failed += r.pass ? 0 : 1;
        rows.push_back({{"id", r.info.id},
                        {"name", r.info.name},
                        {"expected", r.expected},
                        {"got", r.got},
                        {"tolerance", r.tolerance},
                        {"pass", r.pass},
                        {"note", r.note},
                        {"seconds", r.seconds}});
    }
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
    if (config.format == "json") out.open("verify.json") << rows.dump(2) << "\n";
    CommandResult r;
    r.summary = {{"criteria", results.size()}, {"failed", failed}};
    r.code = failed == 0 && !results.empty() ? exit_ok : exit_fail;
    return r;
}

CommandResult cmd_pseudograph(const RunConfig& config, Outputs& out, double c) {
    const auto w = weak_kam_solution(GeneratingFamily::parse(config.family), c, config.solver());
    const auto pg = full_pseudograph(c, w.u);
    if (config.format == "json") {
        json nodes = json::array();
        for (const auto& iv : pg.nodes()) nodes.push_back({iv.lower, iv.upper});
        out.open("pseudograph.json") << json{{"c", c}, {"alpha", w.alpha}, {"corners", pg.corner_count()}, {"nodes", nodes}}.dump(2)
                                     << "\n";
    } else {
        auto f = out.open("pseudograph.csv");
        pg.write_csv(f);
    }
    CommandResult r;
    r.summary = {{"c", c}, {"alpha", w.alpha}, {"corners", pg.corner_count()}, {"residual", w.residual}};
    return r;
}

CommandResult cmd_mather(const RunConfig& config, Outputs& out, long p, long q, std::size_t restarts) {
    const auto set = mather_set(GeneratingFamily::parse(config.family), p, q, restarts, config.seed);
    {
        auto f = out.open("mather.json");
        set.write_json(f);
    }
    CommandResult r;
    r.summary = {{"orbits", set.orbits.size()}, {"min_action", set.min_action}, {"continuum", set.continuum}};
    return r;
}

CommandResult cmd_green(const RunConfig& config, Outputs& out, MapPoint base, int n_max, int density_q, double c) {
    const auto family = GeneratingFamily::parse(config.family);
    const auto g = green_slopes(family, base, n_max);
    CommandResult r;
    r.summary = {{"s_plus", g.s_plus}, {"s_minus", g.s_minus}, {"nesting_margin", g.nesting_margin()}};
    if (config.format == "json") {
        out.open("green.json") << json{{"theta", base.theta}, {"r", base.r}, {"forward", g.forward}, {"backward", g.backward}}.dump(2)
                               << "\n";
    } else {
        auto f = out.open("green.csv");
        f << "k,slope\n";
        for (int k = -n_max; k <= n_max; ++k) {
            if (k == 0) continue;
            const double row[] = {static_cast<double>(k), g.slope(k)};
            write_csv_row(f, row);
        }
    }
    if (density_q > 0) {
        // Leaf momentum c + u' of the weak KAM solution at class c.
        const auto pg = full_pseudograph(c, weak_kam_solution(family, c, config.solver()).u);
        std::vector<double> leaf(pg.size());
        for (std::size_t i = 0; i < leaf.size(); ++i) leaf[i] = pg.nodes()[i].mid();
        const auto d = rational_leaf_density(family, GridFunction(leaf), density_q);
        auto f = out.open("leaf_density.csv");
        d.write_csv(f);
        r.summary["inverse_sqrt_integral"] = d.inverse_sqrt_integral;
    }
    return r;
}

CommandResult cmd_foliation_check(const RunConfig& config, Outputs& out, const std::string& input) {
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot read " + input);
    const auto surface = FoliationSurface::read_csv(in);
    const FoliationTolerances tol{config.c1_tol, config.mono_tol};
    const auto s = straighten_test(surface, tol);
    const auto l = lipschitz_integrability_test(surface, tol);
    json report{{"n", surface.n()},
                {"m", surface.m()},
                {"verdict", to_string(s.verdict)},
                {"stage", s.stage},
                {"c1_defect", s.c1_defect},
                {"min_slope", s.min_slope},
                {"area_residual", s.area_residual},
                {"exact_up_to_vertical_shift", s.exact_up_to_vertical_shift},
                {"lipschitz", {{"pass", l.pass}, {"stage", l.stage}, {"k", l.k}}}};
    if (s.witness) report["witness"] = {{"c", s.witness->c}, {"theta", s.witness->theta}, {"value", s.witness->value}};
    out.open("foliation.json") << report.dump(2) << "\n";
    std::cout << to_string(s.verdict);
    if (!s.stage.empty()) std::cout << " (" << s.stage << ")";
    if (s.witness) std::cout << " witness c = " << format_double(s.witness->c) << ", theta = " << format_double(s.witness->theta);
    std::cout << "\n";
    CommandResult r;
    r.summary = report;
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weak KAM solutions, pseudographs and invariant foliations of twist maps"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "flat key=value file; flags override its entries");

    RunConfig config;
    app.add_option("--family", config.family, "integrable | standard:k=0.9 | conjugated:beta=0.05,gamma=0.05");
    app.add_option("--n", config.n, "grid size (power of two in [256, 16384])");
    app.add_option("--c-min", config.c_min, "smallest class");
    app.add_option("--c-max", config.c_max, "largest class");
    app.add_option("--n-c", config.n_c, "number of classes");
    app.add_option("--tol", config.tol, "value-iteration tolerance");
    app.add_option("--plateau-tol", config.plateau_tol, "rational-fit tolerance");
    app.add_option("--c1-tol", config.c1_tol, "C1 audit tolerance");
    app.add_option("--mono-tol", config.mono_tol, "monotonicity tolerance");
    app.add_option("--window", config.window, "lift window (0: automatic)");
    app.add_option("--max-iters", config.max_iters, "value-iteration budget (0: 50 n)");
    app.add_option("--q-max", config.q_max, "largest plateau denominator");
    app.add_option("--seed", config.seed, "random seed");
    app.add_option("--out", config.out, "output directory");
    app.add_option("--format", config.format, "csv or json");

    auto* alpha = app.add_subcommand("alpha-curve", "alpha(c) and rho(c) on the class grid");
    auto* surface = app.add_subcommand("surface", "continuous selection surface with plateau summary");
    auto* verify = app.add_subcommand("verify", "run the acceptance criteria");
    verify->add_option("--only", config.only, "criterion numbers or name fragments, comma separated");

    double c = 0.0;
    auto* pseudo = app.add_subcommand("pseudograph", "full pseudograph of one weak KAM solution");
    pseudo->add_option("--c", c, "cohomology class");

    long p = 0, q = 1;
    std::size_t restarts = 5;
    auto* mather = app.add_subcommand("mather", "periodic minimizers of rotation p/q");
    mather->add_option("--p", p, "numerator");
    mather->add_option("--q", q, "denominator")->check(CLI::PositiveNumber);
    mather->add_option("--restarts", restarts, "descent restarts")->check(CLI::PositiveNumber);

    MapPoint base;
    int n_max = 20, density_q = 0;
    auto* green = app.add_subcommand("green", "Green slope sequences at a point");
    green->add_option("--theta", base.theta, "base angle");
    green->add_option("--r", base.r, "base momentum");
    green->add_option("--n-max", n_max, "number of iterates")->check(CLI::PositiveNumber);
    green->add_option("--density-q", density_q, "also write the leaf density of period q at class --c");
    green->add_option("--c", c, "class of the leaf for --density-q");

    std::string input;
    auto* foliation = app.add_subcommand("foliation-check", "straightenability of a surface u(theta, c)");
    foliation->add_option("--input", input, "surface CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return exit_bad_config;
    }

    auto* command = app.get_subcommands().front();
    const std::string name = command->get_name();
    const auto t0 = std::chrono::steady_clock::now();
    int code = exit_ok;
    json summary;
    try {
        Outputs out(config.out);
        CommandResult r;
        try {
            if (command == alpha) r = cmd_alpha_curve(config, out);
            else if (command == surface) r = cmd_surface(config, out);
            else if (command == verify) r = cmd_verify(config, out);
            else if (command == pseudo) r = cmd_pseudograph(config, out, c);
            else if (command == mather) r = cmd_mather(config, out, p, q, restarts);
            else if (command == green) r = cmd_green(config, out, base, n_max, density_q, c);
            else r = cmd_foliation_check(config, out, input);
        } catch (const NoConvergence& e) {
            std::cerr << "error: " << e.what() << "\n";
            r.code = exit_no_convergence;
            r.summary = {{"error", e.what()}};
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            r.code = exit_fail;
            r.summary = {{"error", e.what()}};
        }
        code = r.code;
        summary = r.summary;
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.write_manifest(name, config, summary, seconds, code);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_fail;
    }
    return code;
}
