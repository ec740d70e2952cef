#pragma once

// Status-quo benchmark: users pick stations selfishly at locational marginal
// prices (utility R - v d_q - e theta_q), stations admit until full.

#include <cstddef>
#include <optional>
#include <vector>

#include <json.hpp>

#include "evmenu/model.hpp"

namespace evmenu {

struct SelfRoutingAssignment {
    std::vector<std::vector<double>> mass;  // [type][station], vehicles/hour
    std::vector<double> residual;           // kWh per station
};

SelfRoutingAssignment make_assignment(const Scenario& scenario, std::vector<std::vector<double>> mass);

struct EquilibriumWitness {
    bool ok = true;
    std::size_t type = 0;
    std::optional<std::size_t> station;  // nullopt: deviation to not charging
    double gain = 0.0;
};

// Parcel of a type: Lambda / round(Lambda / quantum). quantum <= 0 selects
// the default Lambda_min / 10.
double default_quantum(const Scenario& scenario);
double parcel_size(double potential, double quantum);

EquilibriumWitness verify_equilibrium(const SelfRoutingAssignment& assignment, const Scenario& scenario,
                                      double quantum = 0.0, double tol = 1e-9);

struct Equilibrium {
    SelfRoutingAssignment assignment;
    double welfare = 0.0;
    double quantum = 0.0;
};

double assignment_welfare(const SelfRoutingAssignment& assignment, const Scenario& scenario);

// Sorted ascending by welfare. Throws std::invalid_argument when the instance
// exceeds 12 type-station cells or 20 parcels per type.
std::vector<Equilibrium> enumerate_equilibria(const Scenario& scenario, double quantum = 0.0);

nlohmann::json to_json(const std::vector<Equilibrium>& equilibria, const Scenario& scenario);

}  // namespace evmenu
