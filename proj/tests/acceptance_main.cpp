// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "weakkam/acceptance.hpp"

int main(int argc, char** argv) {
    CLI::App app{"weakkam acceptance suite"};
    weakkam::AcceptanceOptions options;
    std::string family;
    std::vector<int> known;
    app.add_option("--only", options.only, "criterion numbers or name fragments, comma separated");
    app.add_option("--n", options.n_grid, "grid size")->check(CLI::Range(256, 16384));
    app.add_option("--family", family, "replacement for the standard map, e.g. standard:k=0.9");
    app.add_option("--seed", options.seed, "random seed");
    app.add_option("--known-failures", known, "criteria whose FAIL is documented and does not set the exit code")
        ->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    if (!family.empty()) options.family = weakkam::GeneratingFamily::parse(family);

    const auto results = weakkam::run_acceptance(options);
    std::size_t passed = 0, unexpected = 0;
    std::string known_failed;
    for (const auto& r : results) {
        std::cout << weakkam::format_result_line(r) << std::endl;
        if (r.pass) {
            ++passed;
        } else if (std::find(known.begin(), known.end(), r.info.id) != known.end()) {
            known_failed += (known_failed.empty() ? "" : ",") + std::to_string(r.info.id);
        } else {
            ++unexpected;
        }
    }
    std::cout << passed << "/" << results.size() << " criteria passed";
    if (!known_failed.empty()) std::cout << "; known failures: " << known_failed;
    std::cout << std::endl;
    return unexpected == 0 && !results.empty() ? 0 : 1;
}
