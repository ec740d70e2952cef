#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evmenu/runner.hpp"
#include "evmenu/scenario_io.hpp"
#include "support/roundtrip.hpp"
#include "support/scenarios.hpp"

using namespace evmenu;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("evmenu_runner_" + name);
    fs::remove_all(p);
    return p;
}

int run_quiet(RunConfig cfg, std::string* log = nullptr) {
    std::ostringstream os;
    const int code = run(cfg, os);
    if (log) *log = os.str();
    return code;
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

}  // namespace

TEST_CASE("number format") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(123456789.123456789) == "123456789.123");
}

TEST_CASE("minimal scenario smoke run") {
    RunConfig cfg;
    cfg.scenario = fixtures::scenario_dir() / "minimal.json";
    cfg.audit = true;
    cfg.out = fresh_dir("minimal");
    REQUIRE(run_quiet(cfg) == 0);
    CHECK(count_lines(cfg.out / "policy.csv") == 2);
    CHECK(nlohmann::json::parse(fixtures::read_file(cfg.out / "audit.json")).empty());
    const auto summary = nlohmann::json::parse(fixtures::read_file(cfg.out / "summary.json"));
    CHECK(summary["slots"][0]["welfare"].get<double>() == doctest::Approx(480.0));
    CHECK(summary["totals"]["travel_cost"].get<double>() == doctest::Approx(10.0));
}

TEST_CASE("invalid input writes nothing") {
    const fs::path bad = fs::temp_directory_path() / "evmenu_runner_bad.json";
    std::ofstream(bad) << "{ not json";
    RunConfig cfg;
    cfg.scenario = bad;
    cfg.out = fresh_dir("bad");
    std::string log;
    CHECK(run_quiet(cfg, &log) == 2);
    CHECK_FALSE(fs::exists(cfg.out));
    CHECK(log.find("error") != std::string::npos);

    cfg.scenario = fs::temp_directory_path() / "evmenu_runner_missing.json";
    CHECK(run_quiet(cfg) == 2);
    CHECK_FALSE(fs::exists(cfg.out));

    cfg.scenario = fixtures::scenario_dir() / "minimal.json";
    cfg.network = true;
    CHECK(run_quiet(cfg) == 2);
    fs::remove(bad);
}

TEST_CASE("solver failure exits 1") {
    // high-VoT demand exceeds every station: the profit rows cannot be met
    const Scenario s = fixtures::single_preference({20, 40}, {10}, {100, 250}, {4, 3}, {{0.1, 0.2, 10}, {0.2, 0.1, 10}});
    const fs::path file = fs::temp_directory_path() / "evmenu_runner_tight.json";
    std::ofstream(file) << scenario_to_json(s).dump();
    RunConfig cfg;
    cfg.scenario = file;
    cfg.mode = Mode::Profit;
    cfg.out = fresh_dir("tight");
    CHECK(run_quiet(cfg) == 1);
    fs::remove(file);
}

TEST_CASE("line loading with and without the network rows") {
    RunConfig cfg;
    cfg.scenario = fixtures::scenario_dir() / "feeder24.json";
    cfg.out = fresh_dir("feeder_on");
    cfg.network = true;
    REQUIRE(run_quiet(cfg) == 0);
    auto over = [](const fs::path& csv) {
        std::ifstream in(csv);
        std::string line;
        std::getline(in, line);
        int n = 0, rows = 0;
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            std::string f[4];
            for (auto& x : f) std::getline(ls, x, ',');
            ++rows;
            n += std::stod(f[2]) > std::stod(f[3]) + 1e-6;
        }
        return std::make_pair(n, rows);
    };
    const auto on = over(cfg.out / "loading.csv");
    CHECK(on.second == 24);
    CHECK(on.first == 0);

    cfg.network = false;
    cfg.out = fresh_dir("feeder_off");
    REQUIRE(run_quiet(cfg) == 0);
    CHECK(over(cfg.out / "loading.csv").first > 0);
}

TEST_CASE("summary re-derives from policy.csv and reruns are identical") {
    for (Mode mode : {Mode::Welfare, Mode::Profit}) {
        RunConfig cfg;
        cfg.scenario = fixtures::scenario_dir() / "solar24.json";
        cfg.mode = mode;
        cfg.solar = true;
        cfg.audit = true;
        cfg.out = fresh_dir("rt_a");
        REQUIRE(run_quiet(cfg) == 0);
        const auto summary = nlohmann::json::parse(fixtures::read_file(cfg.out / "summary.json"));
        const auto figures = fixtures::reevaluate_policy_csv(cfg.out / "policy.csv", load_scenario(cfg.scenario), true);
        REQUIRE(figures.size() == summary["slots"].size());
        for (std::size_t t = 0; t < figures.size(); ++t) {
            const auto& row = summary["slots"][t];
            CHECK(std::abs(row["welfare"].get<double>() - figures[t].welfare) <= 1e-8);
            CHECK(std::abs(row["profit"].get<double>() - figures[t].profit) <= 1e-8);
            CHECK(std::abs(row["travel_cost"].get<double>() - figures[t].travel_cost) <= 1e-8);
        }

        RunConfig again = cfg;
        again.out = fresh_dir("rt_b");
        REQUIRE(run_quiet(again) == 0);
        for (const char* f : {"policy.csv", "loading.csv", "summary.json", "audit.json"})
            CHECK(fixtures::read_file(cfg.out / f) == fixtures::read_file(again.out / f));
    }
}

TEST_CASE("equilibrium output") {
    RunConfig cfg;
    cfg.scenario = fixtures::scenario_dir() / "benchmark.json";
    cfg.equilibrium = true;
    cfg.out = fresh_dir("eq");
    REQUIRE(run_quiet(cfg) == 0);
    const auto eq = nlohmann::json::parse(fixtures::read_file(cfg.out / "equilibria.json"));
    REQUIRE(eq.size() == 1);
    const double planner = eq[0]["planner_welfare"].get<double>();
    REQUIRE(!eq[0]["equilibria"].empty());
    for (const auto& e : eq[0]["equilibria"]) CHECK(e["welfare"].get<double>() <= planner + 1e-6);
}
