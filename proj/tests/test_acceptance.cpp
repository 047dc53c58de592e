#include "doctest.h"
#include "weakkam/acceptance.hpp"

using namespace weakkam;

namespace {

std::vector<int> selected(const std::string& filter) {
    std::vector<int> ids;
    for (const auto& c : acceptance_criteria())
        if (criterion_selected(c, filter)) ids.push_back(c.id);
    return ids;
}

}  // namespace

TEST_CASE("fourteen criteria in order") {
    const auto& all = acceptance_criteria();
    REQUIRE(all.size() == 14);
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i].id == static_cast<int>(i) + 1);
}

TEST_CASE("filter semantics") {
    CHECK(selected("discounted") == std::vector<int>{4, 5});
    CHECK(selected("Discounted") == std::vector<int>{4, 5});
    CHECK(selected("").size() == 14);
    CHECK(selected("3, 12") == std::vector<int>{3, 12});
    CHECK(selected("alpha,13") == std::vector<int>{1, 2, 13});
    CHECK(selected("nothing-matches").empty());
}

TEST_CASE("a family without twist fails the criteria that use it") {
    AcceptanceOptions o;
    o.only = "aubry";
    o.family = GeneratingFamily::standard(0.9, -1.0);
    const auto r = run_acceptance(o);
    REQUIRE(r.size() == 1);
    CHECK_FALSE(r[0].pass);
    CHECK(r[0].note.find("twist") != std::string::npos);
    CHECK(format_result_line(r[0]).rfind("FAIL   8 aubry-crossing", 0) == 0);
}

TEST_CASE("fast criteria pass on a small grid") {
    AcceptanceOptions o;
    o.n_grid = 256;
    o.only = "straightenability,lipschitz,aubry";
    for (const auto& r : run_acceptance(o)) {
        CHECK_MESSAGE(r.pass, format_result_line(r));
    }
}
