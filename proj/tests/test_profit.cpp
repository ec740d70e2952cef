#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "evmenu/audit.hpp"
#include "evmenu/profit.hpp"
#include "evmenu/welfare.hpp"
#include "support/scenarios.hpp"

using namespace evmenu;

namespace {

Scenario two_vot_pair() {
    // v = (20, 40), one energy, stations d = (0.1, 0.2), ample capacity
    return fixtures::single_preference({20, 40}, {10}, {100, 250}, {2, 3}, {{0.1, 0.2, 1e6}, {0.2, 0.1, 1e6}});
}

// Grid over the share of each type at station 1; keeps only wait chains the
// anchored prices can support, prices them by hand and returns the best profit.
double scan_two_vot_profit(const Scenario& s, int steps) {
    const TypeGrid& g = s.types;
    const double e = g.energy[0];
    const double d1 = s.stations[0].detour_h, d2 = s.stations[1].detour_h;
    const double t1 = s.stations[0].lmp, t2 = s.stations[1].lmp;
    double best = -1e300;
    for (int a = 0; a <= steps; ++a) {
        for (int b = 0; b <= steps; ++b) {
            const double x = double(a) / steps, y = double(b) / steps;
            const double w1 = x * d1 + (1 - x) * d2, w2 = y * d1 + (1 - y) * d2;
            if (w2 > w1 + 1e-12 || w1 > g.reward[0][0] / g.vot[0]) continue;
            const double p1 = g.reward[0][0] - g.vot[0] * w1;
            const double p2 = p1 + g.vot[1] * (w1 - w2);
            if (g.reward[0][1] - g.vot[1] * w2 - p2 < -1e-12) continue;
            const double profit = g.potential[0] * (p1 - e * (x * t1 + (1 - x) * t2)) +
                                  g.potential[1] * (p2 - e * (y * t1 + (1 - y) * t2));
            best = std::max(best, profit);
        }
    }
    return best;
}

bool ic_or_ir_breaks(const AuditReport& r) { return !r.ic_clean() || !r.ir.empty(); }

}  // namespace

TEST_CASE("profit prices") {
    SUBCASE("vertical recursion") {
        const auto s = fixtures::single_preference({20, 40}, {10}, {100, 250}, {1, 1}, {{0.1, 0.1, 1e6}});
        const ProfitMenu m = profit_prices({0.2, 0.1}, s);
        CHECK(m.price[0] == doctest::Approx(96.0));
        CHECK(m.price[1] == doctest::Approx(100.0));
    }
    SUBCASE("horizontal recursion") {
        const auto s = fixtures::single_preference({20}, {10, 20}, {100}, {1, 1}, {{0.1, 0.1, 1e6}});
        const ProfitMenu m = profit_prices({0.1, 0.2}, s);
        CHECK(m.price[0] == doctest::Approx(98.0));
        CHECK(m.price[1] == doctest::Approx(96.0));
    }
    SUBCASE("single type") {
        const auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.1, 1e6}});
        CHECK(profit_prices({0.3}, s).price[0] == doctest::Approx(94.0));
    }
    SUBCASE("broken chain") {
        const auto s = fixtures::single_preference({20, 40}, {10}, {100, 250}, {1, 1}, {{0.1, 0.1, 1e6}});
        CHECK_THROWS_AS(profit_prices({0.1, 0.2}, s), std::domain_error);
        CHECK_THROWS_AS(profit_prices({5.1, 0.1}, s), std::domain_error);
        CHECK_THROWS_AS(profit_prices({0.1}, s), std::invalid_argument);
    }
}

TEST_CASE("profit menu audit on the price example") {
    const auto s = fixtures::single_preference({20, 40}, {10}, {100, 250}, {1, 1}, {{0.1, 0.1, 1e6}});
    Menu m{{96, 100}, {0.2, 0.1}};
    CHECK(audit(m, {1, 1}, s).ic_clean());
    m.price[1] = 101;
    const AuditReport r = audit(m, {1, 1}, s);
    REQUIRE(r.ic_vertical.size() == 1);
    CHECK(r.ic_vertical[0].type == 1);
    CHECK(r.ic_vertical[0].violation == doctest::Approx(1.0));
}

TEST_CASE("single type matches the social planner") {
    const Scenario s = fixtures::running_example();
    const ProfitResult pr = solve_profit(s);
    const SocialResult sr = solve_social(s);
    REQUIRE(pr.ok());
    REQUIRE(sr.ok());
    CHECK(pr.policy.routing[0][0] == doctest::Approx(sr.policy.routing[0][0]));
    CHECK(pr.policy.lambda[0] == doctest::Approx(5.0));
    CHECK(pr.menu.price[0] == doctest::Approx(100.0 - 20.0 * pr.menu.wait[0]));
}

TEST_CASE("high-VoT type gets the short detour") {
    const Scenario s = two_vot_pair();
    const ProfitResult pr = solve_profit(s);
    REQUIRE(pr.ok());
    CHECK(pr.menu.wait[1] == doctest::Approx(0.1));
    CHECK(pr.menu.wait[0] >= pr.menu.wait[1]);
    const double scanned = scan_two_vot_profit(s, 400);
    const double got = evaluate_profit(pr.policy, pr.menu, s);
    CHECK(got == doctest::Approx(scanned).epsilon(1e-9));
    CHECK(audit({pr.menu.price, pr.menu.wait}, pr.policy.lambda, s).empty());
}

TEST_CASE("zero demand gives zero profit") {
    const auto s = fixtures::single_preference({20, 40}, {10}, {100, 250}, {0, 0}, {{0.1, 0.2, 1e6}, {0.2, 0.1, 1e6}});
    const ProfitResult pr = solve_profit(s);
    REQUIRE(pr.ok());
    CHECK(evaluate_profit(pr.policy, pr.menu, s) == 0.0);
    CHECK(pr.policy.lambda == std::vector<double>{0.0, 0.0});
}

TEST_CASE("evaluate profit") {
    const auto s = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.12, 1e6}});
    Policy p;
    p.lambda = {1.0};
    p.routing = {{1.0}};
    ProfitMenu m;
    m.price = {2.2};
    m.wait = {0.1};
    CHECK(evaluate_profit(p, m, s) == doctest::Approx(1.0));
    p.lambda = {0.0};
    CHECK(evaluate_profit(p, m, s) == 0.0);

    const auto free = fixtures::single_preference({20}, {10}, {100}, {1}, {{0.1, 0.0, 1e6}});
    p.lambda = {3.0};
    CHECK(evaluate_profit(p, m, free) == doctest::Approx(6.6));
}

TEST_CASE("deferral only when full service does not fit") {
    // lowest VoT alone exceeds what is left after the high type
    const auto s = fixtures::single_preference({20, 40}, {10}, {100, 250}, {4, 3}, {{0.1, 0.2, 40}, {0.2, 0.1, 20}});
    const ProfitResult pr = solve_profit(s);
    REQUIRE(pr.ok());
    CHECK(pr.policy.lambda[1] == doctest::Approx(3.0));
    CHECK(pr.policy.lambda[0] < 4.0);
    CHECK(check_policy(pr.policy, s).empty());
    CHECK(audit({pr.menu.price, pr.menu.wait}, pr.policy.lambda, s).ic_clean());

    const auto roomy = fixtures::single_preference({20, 40}, {10}, {100, 250}, {4, 3}, {{0.1, 0.2, 40}, {0.2, 0.1, 100}});
    CHECK(solve_profit(roomy).policy.lambda[0] == doctest::Approx(4.0));

    const auto tight = fixtures::single_preference({20, 40}, {10}, {100, 250}, {4, 3}, {{0.1, 0.2, 10}, {0.2, 0.1, 10}});
    CHECK(solve_profit(tight).lp.status == lp::Status::Infeasible);
}

TEST_CASE("randomized instances: audit, revenue maximality, objective identities") {
    std::mt19937_64 rng(777);
    for (int n = 0; n < 40; ++n) {
        const Scenario s = fixtures::random_small(rng);
        CAPTURE(n);
        for (RentIndex rent : {RentIndex::Verbatim, RentIndex::Energy}) {
            ProfitOptions opt;
            opt.rent = rent;
            const ProfitResult pr = solve_profit(s, opt);
            REQUIRE(pr.ok());
            const Menu menu{pr.menu.price, pr.menu.wait};
            CHECK(audit(menu, pr.policy.lambda, s).empty());
            CHECK(check_policy(pr.policy, s).empty());
            CHECK(reduced_profit_objective(pr.policy, pr.menu, s, rent) ==
                  doctest::Approx(pr.lp_objective).epsilon(1e-9));
            CHECK(evaluate_profit(pr.policy, pr.menu, s) ==
                  doctest::Approx(reduced_profit_objective(pr.policy, pr.menu, s, RentIndex::Energy)).epsilon(1e-9));
            for (std::size_t k = 0; k < menu.price.size(); ++k) {
                Menu raised = menu;
                raised.price[k] += 1e-3;
                CHECK(ic_or_ir_breaks(audit(raised, pr.policy.lambda, s)));
            }
        }
    }
}
