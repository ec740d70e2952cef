#include <doctest.h>

#include <fstream>

#include "evmenu/model.hpp"
#include "evmenu/scenario_io.hpp"
#include "support/scenarios.hpp"

using namespace evmenu;

TEST_CASE("expected wait") {
    const std::vector<Station> st{{0.03, 0, 1, 0}, {0.06, 0, 1, 0}};
    CHECK(expected_wait({1, 0}, st) == doctest::Approx(0.03));
    CHECK(expected_wait({0.5, 0.5}, st) == doctest::Approx(0.045));
    CHECK(expected_wait({1}, {st[0]}) == doctest::Approx(0.03));
    CHECK_THROWS_AS(expected_wait({1}, st), std::invalid_argument);
}

TEST_CASE("type utility") {
    CHECK(type_utility(440, 20, 0.9, 50 * 0.3) == doctest::Approx(407));
    CHECK(type_utility(100, 20, 0.1, 98) == doctest::Approx(0));
    CHECK(type_utility(100, 20, 0, 0) == 100);
}

TEST_CASE("validation") {
    SUBCASE("published benchmark rewards break Assumption 2") {
        const auto s = fixtures::load("benchmark.json");
        const auto r = validate_scenario(s);
        CHECK_FALSE(r.has_errors());
        CHECK(r.count("assumption2") == 2);
    }
    SUBCASE("single type, single station") {
        const auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.2, 10}});
        CHECK(validate_scenario(s).empty());
    }
    SUBCASE("Assumption 1") {
        auto s = fixtures::single_preference({20}, {10}, {100}, {1, 1}, {{0.1, 0.2, 10}, {0.2, 0.1, 10}});
        s.preferences.push_back(TravelPreference{{1}});
        s.types.reward = {{100}, {99}};
        CHECK(validate_scenario(s).count("assumption1") == 1);
        s.types.reward = {{100}, {101}};
        CHECK(validate_scenario(s).count("assumption1") == 0);
    }
    SUBCASE("structural errors") {
        auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.2, 10}, {0.2, 0.1, 10}});
        s.preferences[0].stations = {0};
        CHECK(validate_scenario(s).count("missing_outside_option") == 1);
        s = fixtures::single_preference({20}, {10}, {100}, {1, 2}, {{0.1, 0.2, 10}});
        CHECK(validate_scenario(s).has_errors());
        s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.2, -1}});
        CHECK(validate_scenario(s).count("station_capacity") == 1);
        s = fixtures::single_preference({30, 20}, {10}, {100, 100}, {1, 1}, {{0.1, 0.2, 10}});
        CHECK(validate_scenario(s).count("vot_order") == 1);
    }
    SUBCASE("outside option with dearer energy is a warning") {
        const auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.1, 10}, {0.2, 0.2, 10}});
        const auto r = validate_scenario(s);
        CHECK_FALSE(r.has_errors());
        CHECK(r.count("outside_lmp") == 1);
    }
}

TEST_CASE("preference relations") {
    auto s = fixtures::single_preference({20}, {10}, {100}, {1, 1, 1}, {{0.1, 0, 1}, {0.2, 0, 1}, {0.3, 0, 1}});
    s.preferences = {TravelPreference{{0, 1, 2}}, TravelPreference{{1, 2}}, TravelPreference{{2}}};
    s.types.reward = {{100}, {110}, {120}};
    CHECK(s.subset_preferences(0) == std::vector<std::size_t>{1, 2});
    CHECK(s.covered_preferences(0) == std::vector<std::size_t>{1});
    CHECK(s.next_smaller_preferences(0) == std::vector<std::size_t>{1});
    CHECK(s.subset_preferences(2).empty());
    CHECK(s.outside_option() == 2);
}

TEST_CASE("flat type index") {
    TypeGrid g;
    g.vot = {1, 2, 3};
    g.energy = {1, 2};
    g.reward = {{1, 2, 3}, {1, 2, 3}};
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(g.flat(g.unflat(k)) == k);
    CHECK(g.flat({2, 1, 1}) == 11);
}

TEST_CASE("check policy") {
    const Scenario s = fixtures::running_example();
    Policy p;
    p.lambda = {5};
    p.routing = {{0.6, 0.4}};
    p.wait = {0.14};
    p.price = {2.2};
    CHECK(check_policy(p, s).empty());
    p.routing = {{1.0, 0.0}};
    CHECK_FALSE(check_policy(p, s).empty());  // 50 kWh at a 30 kWh station
    p.routing = {{0.5, 0.4}};
    CHECK_FALSE(check_policy(p, s).empty());
}

TEST_CASE("scenario JSON round trip") {
    for (const char* name : {"minimal.json", "benchmark.json", "corridor.json", "feeder24.json", "solar24.json"}) {
        CAPTURE(name);
        const Scenario s = fixtures::load(name);
        CHECK_FALSE(validate_scenario(s).has_errors());
        const Scenario back = scenario_from_json(scenario_to_json(s));
        CHECK(scenario_to_json(back) == scenario_to_json(s));
    }
}

TEST_CASE("scenario format errors") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/file.json"), ScenarioFormatError);
    const auto path = std::filesystem::temp_directory_path() / "evmenu_bad.json";
    std::ofstream(path) << "{ \"types\": ";
    CHECK_THROWS_AS(load_scenario(path), ScenarioFormatError);
    std::ofstream(path) << R"({"types": {"v": [20], "e": [10], "R": [[100]], "Lambda": [[[1]]]},
                              "preferences": [[0]], "stations": {"d": [0.1], "theta": [0.1], "C": [10]}})";
    CHECK_THROWS_AS(load_scenario(path), ScenarioFormatError);
    std::filesystem::remove(path);
}
