#pragma once

// Hard-capacity social planner: admission and routing by one LP over the
// temporary allocations h (virtual non-participation station appended),
// priced by the capacity and line duals.

#include <cstddef>
#include <vector>

#include "evmenu/lp.hpp"
#include "evmenu/model.hpp"

namespace evmenu {

struct StationOrder {
    std::vector<double> o;            // per station
    std::vector<std::size_t> order;   // stations sorted by o, ties by index
};

// o_s = v_1 (d_s - d_Q) + e_E (theta_s - theta_Q)
StationOrder station_order(const Scenario& scenario);

struct AdmissibleSets {
    std::vector<bool> station;  // X membership per station
    std::vector<bool> type;     // Y membership per flat type index
};

AdmissibleSets admissible_sets(const Scenario& scenario);

// theta = 0, d = max_l R_V^l / v_1 + 1, unlimited capacity.
Station make_virtual_station(const Scenario& scenario);

// One network row: coef[type][station] multiplies h (already scaled by
// Lambda * e_j), summed and compared with limit.
struct LoadRow {
    std::size_t line = 0;
    std::vector<std::vector<double>> coef;
    double limit = 0.0;
};

// (D E)[line, bus-of-q] per station, solar stations mapped to their host.
// Throws std::invalid_argument on dimension mismatch.
std::vector<std::vector<double>> line_sensitivity(const Scenario& scenario);
std::vector<LoadRow> network_rows(const Scenario& scenario);

// Appends a zero-price virtual station at each host with positive solar.
Scenario solarize(const Scenario& scenario, const std::vector<double>& solar_kwh);

enum class VirtualColumn {
    Neutral,  // non-admission contributes nothing
    Literal,  // coefficient Lambda (R - v d_{Q+1}) as written for omega
};

struct SocialOptions {
    bool network = false;
    VirtualColumn virtual_column = VirtualColumn::Neutral;
    bool restrict_to_admissible = false;
};

struct SocialResult {
    Policy policy;
    lp::Solution lp;
    std::vector<std::vector<double>> h;  // [type][station], last entry virtual
    std::vector<double> capacity_dual;   // $/kWh per station
    std::vector<double> line_dual;       // $/kWh per line
    std::vector<double> marginal;        // capacity dual + mapped line duals per station
    Station virtual_station;
    double bdp_objective = 0.0;

    bool ok() const { return lp.optimal(); }
};

SocialResult solve_social(const Scenario& scenario, const SocialOptions& options = {});

// P = e (theta + x)^T r
std::vector<double> social_prices(const Policy& policy, const std::vector<double>& marginal,
                                  const Scenario& scenario);

// sum lambda (R - v W - e theta^T r)
double evaluate_welfare(const Policy& policy, const Scenario& scenario);

// Routing of a non-admitted type: its best station under the posted
// marginal prices (first index on ties).
std::size_t posted_station(const Scenario& scenario, TypeIndex t, const std::vector<double>& marginal);

// Fills wait from routing and checks lengths.
void fill_waits(Policy& policy, const Scenario& scenario);

// Energy delivered per station.
std::vector<double> station_loads(const Policy& policy, const Scenario& scenario);

}  // namespace evmenu
