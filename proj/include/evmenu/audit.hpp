#pragma once

// Menu auditing: pairwise IC, case-split IR, local IC, wait monotonicity and
// the admission border; structure checks for solver outputs; and the
// brute-force social-welfare oracle.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evmenu/model.hpp"

namespace evmenu {

inline constexpr std::size_t kNoType = static_cast<std::size_t>(-1);

struct AuditEntry {
    std::string check;
    std::size_t type = kNoType;   // flat index
    std::size_t other = kNoType;  // flat index of the mimicked type, or a station
    double lhs = 0.0;
    double rhs = 0.0;
    double violation = 0.0;  // amount by which lhs <= rhs fails
};

struct AuditReport {
    std::vector<AuditEntry> ic_vertical;
    std::vector<AuditEntry> ic_horizontal;
    std::vector<AuditEntry> ic_preference;
    std::vector<AuditEntry> local_ic;
    std::vector<AuditEntry> ir;
    std::vector<AuditEntry> wait_monotonicity;
    std::vector<AuditEntry> border_structure;
    bool local_matches_global = true;

    bool ic_clean() const { return ic_vertical.empty() && ic_horizontal.empty() && ic_preference.empty(); }
    bool empty() const;
    std::size_t size() const;
    std::vector<const AuditEntry*> all() const;
};

nlohmann::json to_json(const AuditReport& report, const TypeGrid& grid);

struct AuditOptions {
    double tol = 1e-7;
    bool border = true;  // include the border-structure check
};

AuditReport audit(const Menu& menu, const std::vector<double>& lambda, const Scenario& scenario,
                  const AuditOptions& options = {});

// Best option for `type` over k >= j, t in B_l plus l itself. Returns the
// flat index, or nullopt when every option has negative utility. Ties go to
// the type's own option, then to the lowest flat index.
std::optional<std::size_t> best_response(TypeIndex type, const Menu& menu, const Scenario& scenario,
                                         double tie_tol = 1e-9);

// Exchange-argument structure of social solutions on single-preference,
// capacity-only scenarios. nullopt when not applicable.
std::optional<std::vector<AuditEntry>> check_priority_order(const Policy& policy, const Scenario& scenario,
                                                            double tol = 1e-7);
std::optional<std::vector<AuditEntry>> check_fill_order(const Policy& policy, const Scenario& scenario,
                                                        double tol = 1e-7);

struct OracleResult {
    double welfare = 0.0;
    double lipschitz = 0.0;         // welfare change bound per unit grid step
    double resolution_bound = 0.0;  // lipschitz / g
    std::string method;             // "grid" or "vertex"
};

// Best welfare over admission/routing with capacities honored. Uses a true
// grid over {0, 1/g, ..., 1} per cell when that lattice is small, otherwise
// enumerates the vertices of the mass polytope (exact). Throws
// std::invalid_argument when (Q+1)*V*E*B > 12.
OracleResult brute_force_social(const Scenario& scenario, int grid = 200);

}  // namespace evmenu
