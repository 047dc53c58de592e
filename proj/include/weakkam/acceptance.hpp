#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "weakkam/twist_map.hpp"

namespace weakkam {

struct CriterionInfo {
    int id = 0;
    std::string name;
    std::string description;
};

// The fourteen acceptance criteria in order.
[[nodiscard]] const std::vector<CriterionInfo>& acceptance_criteria();

// Comma-separated tokens; a token selects a criterion by number or by a substring of its name.
// An empty filter selects everything.
[[nodiscard]] bool criterion_selected(const CriterionInfo& criterion, const std::string& filter);

struct AcceptanceOptions {
    std::size_t n_grid = 1024;
    // Replaces the standard map (k = 0.9) in the criteria that exercise it.
    std::optional<GeneratingFamily> family;
    std::string only;
    unsigned seed = 1;
};

struct CriterionResult {
    CriterionInfo info;
    std::string expected;
    std::string got;
    std::string tolerance;
    std::string note;  // informational output (timings, counts) or the error that aborted the check
    bool pass = false;
    double seconds = 0.0;
};

// Runs the selected criteria; exceptions inside a criterion turn into a FAIL with the message in `note`.
[[nodiscard]] std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

// One line per criterion: "PASS  1 alpha-integrable  got ... expected ... tol ...".
[[nodiscard]] std::string format_result_line(const CriterionResult& result);

}  // namespace weakkam
