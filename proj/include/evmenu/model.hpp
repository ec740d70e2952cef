#pragma once

// Scenario data types for the charging-network planner.
//
// Units: hours for times, kWh for energy, $ for money. One timeline slot is
// one hour, so a station capacity in kWh caps the energy delivered per slot.
//
// Type grid indices are zero-based internally: vot index i in [0, V), energy
// index j in [0, E), preference index l in [0, B). Flattened grids use
// (l * V + i) * E + j, which is the column order of the routing matrix.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace evmenu {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct TypeIndex {
    std::size_t i = 0;  // value of time
    std::size_t j = 0;  // energy demand
    std::size_t l = 0;  // travel preference
    friend bool operator==(const TypeIndex&, const TypeIndex&) = default;
};

struct Station {
    double detour_h = 0.0;       // d_q
    double lmp = 0.0;            // theta_q, $/kWh
    double capacity_kwh = kInf;  // C_q per slot
    double queue_h = 0.0;        // rho_q, zero in hard-capacity mode
    bool is_virtual = false;
    std::optional<std::size_t> host;  // physical host of a solar virtual station
};

struct TypeGrid {
    std::vector<double> vot;                  // v_i, strictly ascending
    std::vector<double> energy;               // e_j, strictly ascending
    std::vector<std::vector<double>> reward;  // R[l][i]
    std::vector<double> potential;            // Lambda, flattened (l, i, j)

    std::size_t num_vot() const { return vot.size(); }
    std::size_t num_energy() const { return energy.size(); }
    std::size_t num_pref() const { return reward.size(); }
    std::size_t size() const { return num_vot() * num_energy() * num_pref(); }

    std::size_t flat(TypeIndex t) const { return (t.l * num_vot() + t.i) * num_energy() + t.j; }
    TypeIndex unflat(std::size_t k) const {
        const std::size_t e = num_energy(), v = num_vot();
        return {(k / e) % v, k % e, k / (e * v)};
    }
    double reward_of(TypeIndex t) const { return reward[t.l][t.i]; }
    double potential_of(TypeIndex t) const { return potential[flat(t)]; }
};

// Access set G_l as sorted zero-based station indices.
struct TravelPreference {
    std::vector<std::size_t> stations;

    bool contains(std::size_t q) const;
    // y_l as a 0/1 vector of length num_stations
    std::vector<int> access_vector(std::size_t num_stations) const;
};

// Line flows are ptdf * station_bus * station_loads; limits net of
// conventional load.
struct DistributionNetwork {
    std::vector<std::vector<double>> ptdf;         // lines x buses
    std::vector<std::vector<double>> station_bus;  // buses x physical stations, 0/1
    std::vector<double> line_limits;               // kWh per slot

    std::size_t num_lines() const { return ptdf.size(); }
    std::size_t num_buses() const { return station_bus.size(); }
};

struct TimelineSlot {
    std::vector<double> potential;    // Lambda(t), flattened like TypeGrid::potential
    std::vector<double> solar_kwh;    // per station, may be empty
    std::vector<double> line_limits;  // f(t), may be empty
};

struct Scenario {
    TypeGrid types;
    std::vector<TravelPreference> preferences;
    std::vector<Station> stations;
    std::optional<DistributionNetwork> network;
    std::vector<TimelineSlot> timeline;

    std::size_t num_stations() const { return stations.size(); }
    // The outside option Q: the last physical station.
    std::size_t outside_option() const;
    // Bus column of a station; solar virtual stations map to their host.
    std::size_t physical_station(std::size_t q) const;

    // B_l: preferences t whose access set is a strict subset of G_l.
    std::vector<std::size_t> subset_preferences(std::size_t l) const;
    // T_l as written for local IC: members of B_l with |G_t| = |G_l| - 1.
    std::vector<std::size_t> next_smaller_preferences(std::size_t l) const;
    // Covering relation inside B_l: t in B_l with no scenario preference strictly between.
    std::vector<std::size_t> covered_preferences(std::size_t l) const;

    // Copy with Lambda and line limits replaced by those of a timeline slot.
    Scenario slot(std::size_t t) const;
};

// Per-type menu/policy data, every vector indexed by TypeGrid::flat.
struct Policy {
    std::vector<double> lambda;
    std::vector<std::vector<double>> routing;  // [type][station]
    std::vector<double> wait;
    std::vector<double> price;
};

struct Menu {
    std::vector<double> price;
    std::vector<double> wait;
};

enum class Severity { Warning, Error };

struct ValidationIssue {
    Severity severity;
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool has_errors() const;
    bool empty() const { return issues.empty(); }
    std::size_t count(const std::string& code) const;
};

ValidationReport validate_scenario(const Scenario& scenario);

// W = sum_q (d_q + rho_q) r_q. Throws std::invalid_argument on length mismatch.
double expected_wait(const std::vector<double>& routing, const std::vector<Station>& stations);

// R - v W - P; may be negative.
double type_utility(double reward, double vot, double wait, double price);

// Checks the Policy invariants (bounds, routing simplex on G_l, station loads).
// Returns human-readable violations; empty when all hold.
std::vector<std::string> check_policy(const Policy& policy, const Scenario& scenario,
                                      double load_tol = 1e-6);

}  // namespace evmenu
