#pragma once

// Profit-maximizing planner. Prices follow the saturated IC recursion from
// the lowest-VoT anchor P_{1,1,l} = R_1^l - v_1 W_{1,1,l}; the LP chooses the
// h allocation subject to the rows that keep those prices IC and IR.

#include <cstddef>
#include <vector>

#include "evmenu/lp.hpp"
#include "evmenu/model.hpp"

namespace evmenu {

struct ProfitMenu {
    std::vector<double> price;
    std::vector<double> wait;
    double path_discrepancy = 0.0;  // max |P(j-sweep first) - P(i-sweep first)|
};

// Throws std::domain_error when the waits break the chain
// W_V <= ... <= W_1 <= R_1/v_1 for some (j, l).
ProfitMenu profit_prices(const std::vector<double>& waits, const Scenario& scenario);

enum class RentIndex {
    Verbatim,  // rent charged on the energy-1 column of each (i, l)
    Energy,    // rent charged on the type's own energy column
};

enum class Deferral {
    WhenInfeasible,  // serve everyone in full if capacity allows
    Always,          // virtual column for the lowest VoT in every solve
};

struct ProfitOptions {
    RentIndex rent = RentIndex::Verbatim;
    Deferral deferral = Deferral::WhenInfeasible;
    bool network = false;
};

struct ProfitResult {
    Policy policy;  // served rates, physical routing and waits, menu prices
    ProfitMenu menu;
    lp::Solution lp;
    std::vector<std::vector<double>> h;  // [type][station], last entry virtual
    double lp_objective = 0.0;

    bool ok() const { return lp.optimal(); }
};

// By default serves every type in full when capacity allows; otherwise
// lowest-VoT types may be deferred through the virtual station.
ProfitResult solve_profit(const Scenario& scenario, const ProfitOptions& options = {});

// sum lambda (P - e theta^T r)
double evaluate_profit(const Policy& policy, const ProfitMenu& menu, const Scenario& scenario);

// sum lambda (R_1 - v W - e theta^T r) + information rent, with W the menu
// waits and the rent placed per `rent`.
double reduced_profit_objective(const Policy& policy, const ProfitMenu& menu, const Scenario& scenario,
                                RentIndex rent);

}  // namespace evmenu
