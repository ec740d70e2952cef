#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "evmenu/audit.hpp"
#include "evmenu/welfare.hpp"
#include "support/scenarios.hpp"

using namespace evmenu;

namespace {

// One type over two stations: scan the split n1 + n2 <= Lambda on a fine grid.
double scan_two_stations(const Scenario& s) {
    const TypeGrid& g = s.types;
    const double lam = g.potential[0], e = g.energy[0], v = g.vot[0], r = g.reward[0][0];
    const int steps = 5000;
    double best = 0.0;
    for (int a = 0; a <= steps; ++a) {
        for (int b = 0; a + b <= steps; b += 50) {
            const double n1 = lam * a / steps, n2 = lam * b / steps;
            if (n1 * e > s.stations[0].capacity_kwh + 1e-9 || n2 * e > s.stations[1].capacity_kwh + 1e-9) continue;
            double w = 0.0;
            for (int q = 0; q < 2; ++q) {
                const double n = q == 0 ? n1 : n2;
                w += n * (r - v * s.stations[q].detour_h - e * s.stations[q].lmp);
            }
            best = std::max(best, w);
        }
    }
    return best;
}

}  // namespace

TEST_CASE("station order") {
    SUBCASE("two stations") {
        const auto o = station_order(fixtures::running_example());
        CHECK(o.o[0] == doctest::Approx(-1.0));
        CHECK(o.o[1] == doctest::Approx(0.0));
        CHECK(o.order == std::vector<std::size_t>{0, 1});
    }
    SUBCASE("ties keep index order") {
        const auto s = fixtures::single_preference({20, 30, 40}, {40, 50, 60}, {440, 635, 845}, std::vector<double>(9, 1.0),
                                                   {{0.3, 0.5, 1e6}, {0.6, 0.4, 1e6}, {0.9, 0.3, 1e6}});
        const auto o = station_order(s);
        for (double x : o.o) CHECK(x == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(o.order == std::vector<std::size_t>{0, 1, 2});
    }
    SUBCASE("single station") {
        const auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.2, 10}});
        CHECK(station_order(s).order == std::vector<std::size_t>{0});
    }
}

TEST_CASE("admissible sets") {
    auto s = fixtures::single_preference({20, 30, 40}, {40, 50, 60}, {440, 635, 845}, std::vector<double>(9, 1.0),
                                         {{0.3, 0.5, 1e6}, {0.6, 0.4, 1e6}, {0.9, 0.3, 1e6}});
    auto adm = admissible_sets(s);
    CHECK(std::all_of(adm.station.begin(), adm.station.end(), [](bool b) { return b; }));
    CHECK(adm.type[s.types.flat({0, 1, 0})]);

    s.types.reward[0][0] = 0.0;
    adm = admissible_sets(s);
    CHECK_FALSE(adm.type[s.types.flat({0, 1, 0})]);

    // equal to the outside option is admissible
    auto t = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.2, 0.1, 10}, {0.2, 0.1, 10}});
    CHECK(admissible_sets(t).station[0]);
}

TEST_CASE("virtual station") {
    const auto s = fixtures::single_preference({20, 30, 40}, {40, 50, 60}, {440, 635, 845}, std::vector<double>(9, 1.0),
                                               {{0.3, 0.5, 1e6}, {0.6, 0.4, 1e6}, {0.9, 0.3, 1e6}});
    const Station v = make_virtual_station(s);
    CHECK(v.detour_h == doctest::Approx(43.25));
    CHECK(845.0 < 20.0 * v.detour_h);
    CHECK(v.lmp == 0.0);
    CHECK(std::isinf(v.capacity_kwh));
    CHECK(v.is_virtual);

    const auto unit = fixtures::single_preference({20}, {10}, {20}, {1}, {{0.1, 0.2, 10}});
    CHECK(make_virtual_station(unit).detour_h == doctest::Approx(2.0));
}

TEST_CASE("running example") {
    const Scenario s = fixtures::running_example();
    const SocialResult res = solve_social(s);
    REQUIRE(res.ok());
    const Policy& p = res.policy;

    const double scanned = scan_two_stations(s);
    CHECK(scanned == doctest::Approx(478.0).epsilon(1e-9));
    CHECK(evaluate_welfare(p, s) == doctest::Approx(scanned).epsilon(1e-9));
    CHECK(p.lambda[0] == doctest::Approx(5.0));
    CHECK(p.routing[0][0] == doctest::Approx(0.6));
    CHECK(p.routing[0][1] == doctest::Approx(0.4));
    CHECK(p.wait[0] == doctest::Approx(0.14));
    CHECK(res.h[0][2] == doctest::Approx(0.0));

    SUBCASE("capacity dual matches a finite difference") {
        const double up = evaluate_welfare(solve_social(fixtures::running_example(31)).policy, s);
        const double down = evaluate_welfare(solve_social(fixtures::running_example(29)).policy, s);
        CHECK(res.capacity_dual[0] == doctest::Approx(0.1));
        CHECK((up - down) / 2.0 == doctest::Approx(res.capacity_dual[0]));
        CHECK(res.capacity_dual[1] == doctest::Approx(0.0));
    }
    SUBCASE("price and IR") {
        CHECK(p.price[0] == doctest::Approx(2.2));
        CHECK(100.0 - 20.0 * p.wait[0] - p.price[0] == doctest::Approx(95.0));
        const AuditReport rep = audit({p.price, p.wait}, p.lambda, s);
        CHECK(rep.empty());
    }
}

TEST_CASE("ample capacity sends everyone to the best station") {
    const Scenario s = fixtures::running_example(1e6);
    const SocialResult res = solve_social(s);
    REQUIRE(res.ok());
    CHECK(evaluate_welfare(res.policy, s) == doctest::Approx(480.0));
    CHECK(res.policy.routing[0][0] == doctest::Approx(1.0));
    CHECK(res.h[0][2] == doctest::Approx(0.0));
    CHECK(res.policy.price[0] == doctest::Approx(2.0));
}

TEST_CASE("unprofitable type is not admitted") {
    const auto s = fixtures::single_preference({20}, {10}, {3}, {5}, {{0.1, 0.2, 30}, {0.2, 0.1, 1e6}});
    const SocialResult res = solve_social(s);
    REQUIRE(res.ok());
    CHECK(res.policy.lambda[0] == 0.0);
    CHECK(res.h[0][2] == doctest::Approx(1.0));
    CHECK(evaluate_welfare(res.policy, s) == 0.0);
    CHECK(audit({res.policy.price, res.policy.wait}, res.policy.lambda, s).empty());
}

TEST_CASE("literal virtual column trades welfare for admissions") {
    // The literal coefficient values an admission at v (d_v - d) - e theta, so
    // it prefers the small low-VoT vehicles even though the large high-VoT
    // ones earn more per kWh of the shared capacity.
    const auto s = fixtures::single_preference({10, 20}, {10, 30}, {30, 100}, {4, 0, 0, 2}, {{0.0, 0.0, 60}});
    const double neutral = evaluate_welfare(solve_social(s).policy, s);
    SocialOptions lit;
    lit.virtual_column = VirtualColumn::Literal;
    const double literal = evaluate_welfare(solve_social(s, lit).policy, s);
    const OracleResult oracle = brute_force_social(s);
    CHECK(neutral == doctest::Approx(200.0));
    CHECK(std::abs(neutral - oracle.welfare) <= oracle.resolution_bound + 1e-6);
    CHECK(literal == doctest::Approx(120.0 + 200.0 / 3.0));
}

TEST_CASE("social prices") {
    const auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.1, 1e6}});
    Policy p;
    p.lambda = {1.0};
    p.routing = {{1.0}};
    CHECK(social_prices(p, {0.0}, s)[0] == doctest::Approx(1.0));

    const Scenario sol = solarize(fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.1, 1e6}}), {100.0});
    const SocialResult res = solve_social(sol);
    REQUIRE(res.ok());
    CHECK(res.policy.routing[0][1] == doctest::Approx(1.0));
    CHECK(res.policy.price[0] == doctest::Approx(0.0));
}

TEST_CASE("network rows") {
    auto s = fixtures::single_preference({20}, {10}, {100}, {5}, {{0.1, 0.2, 1e6}});
    CHECK(network_rows(s).empty());

    s.network = DistributionNetwork{{{1.0}}, {{1.0}}, {50.0}};
    auto rows = network_rows(s);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].limit == 50.0);
    CHECK(rows[0].coef[0][0] == doctest::Approx(5.0 * 10.0));

    auto two = fixtures::single_preference({20}, {10}, {100}, {5}, {{0.1, 0.2, 1e6}, {0.2, 0.1, 1e6}});
    two.network = DistributionNetwork{{{1.0}}, {{1.0, 1.0}}, {20.0}};
    rows = network_rows(two);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].coef[0][0] == doctest::Approx(50.0));
    CHECK(rows[0].coef[0][1] == doctest::Approx(50.0));

    SocialOptions opt;
    opt.network = true;
    const SocialResult res = solve_social(two, opt);
    REQUIRE(res.ok());
    const auto load = station_loads(res.policy, two);
    CHECK(load[0] + load[1] <= 20.0 + 1e-6);
    CHECK(res.line_dual[0] > 0.0);

    two.network->ptdf = {{1.0, 0.0}};
    CHECK_THROWS_AS(line_sensitivity(two), std::invalid_argument);
}

TEST_CASE("solarize") {
    const auto base = fixtures::single_preference({20}, {10}, {100}, {5}, {{0.1, 0.2, 100}, {0.2, 0.1, 100}});
    const Scenario none = solarize(base, {0.0, 0.0});
    CHECK(none.num_stations() == 2);

    const Scenario one = solarize(base, {0.0, 500.0});
    REQUIRE(one.num_stations() == 3);
    const Station& v = one.stations[2];
    CHECK(v.is_virtual);
    CHECK(v.host == std::optional<std::size_t>(1));
    CHECK(v.detour_h == 0.2);
    CHECK(v.lmp == 0.0);
    CHECK(v.capacity_kwh == 500.0);
    CHECK(one.preferences[0].contains(2));
    CHECK(one.outside_option() == 1);

    const Scenario both = solarize(base, {30.0, 40.0});
    REQUIRE(both.num_stations() == 4);
    CHECK(*both.stations[2].host == 0);
    CHECK(*both.stations[3].host == 1);
}

TEST_CASE("evaluate welfare") {
    const auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.0, 0.0, 1e6}});
    Policy p;
    p.lambda = {0.0};
    p.routing = {{1.0}};
    CHECK(evaluate_welfare(p, s) == 0.0);
    p.lambda = {1.0};
    CHECK(evaluate_welfare(p, s) == doctest::Approx(100.0));
}

TEST_CASE("randomized instances agree with the brute-force oracle and audit clean") {
    std::mt19937_64 rng(20240611);
    for (int n = 0; n < 40; ++n) {
        const Scenario s = fixtures::random_small(rng);
        CAPTURE(n);
        const SocialResult res = solve_social(s);
        REQUIRE(res.ok());
        const OracleResult oracle = brute_force_social(s);
        const double w = evaluate_welfare(res.policy, s);
        CHECK(std::abs(w - oracle.welfare) <= oracle.resolution_bound + 1e-6);
        CHECK(w >= oracle.welfare - 1e-6);
        CHECK(check_policy(res.policy, s).empty());
        CHECK(audit({res.policy.price, res.policy.wait}, res.policy.lambda, s).empty());

        // extra capacity never lowers welfare
        Scenario more = s;
        for (auto& st : more.stations) st.capacity_kwh *= 1.5;
        CHECK(evaluate_welfare(solve_social(more).policy, more) >= w - 1e-7);
    }
}
