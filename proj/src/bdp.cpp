#include "bdp.hpp"

#include <algorithm>
#include <cmath>

namespace evmenu::detail {

BdpLayout make_layout(const Scenario& s, const std::function<bool(std::size_t)>& include_type,
                      const std::function<bool(std::size_t, std::size_t)>& allow_station,
                      const std::function<bool(std::size_t)>& allow_virtual) {
    const TypeGrid& g = s.types;
    BdpLayout lay;
    lay.num_stations = s.num_stations();
    lay.col.assign(g.size(), std::vector<std::size_t>(lay.num_stations + 1, kNoColumn));
    lay.active.assign(g.size(), false);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!include_type(k)) continue;
        lay.active[k] = true;
        const TypeIndex t = g.unflat(k);
        for (std::size_t q : s.preferences[t.l].stations) {
            if (allow_station(k, q)) lay.col[k][q] = lay.num_cols++;
        }
        if (allow_virtual(k)) lay.col[k][lay.num_stations] = lay.num_cols++;
    }
    return lay;
}

RowIndex add_common_rows(lp::Problem& p, const Scenario& s, const BdpLayout& lay, bool network) {
    const TypeGrid& g = s.types;
    const std::size_t S = lay.num_stations;
    RowIndex idx;
    idx.simplex.assign(g.size(), kNoColumn);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!lay.active[k]) continue;
        std::vector<double> row(lay.num_cols, 0.0);
        for (std::size_t q = 0; q <= S; ++q) {
            if (lay.at(k, q) != kNoColumn) row[lay.at(k, q)] = 1.0;
        }
        idx.simplex[k] = p.add_eq(std::move(row), 1.0);
    }

    idx.capacity.assign(S, kNoColumn);
    for (std::size_t q = 0; q < S; ++q) {
        if (!std::isfinite(s.stations[q].capacity_kwh)) continue;
        std::vector<double> row(lay.num_cols, 0.0);
        bool any = false;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (lay.at(k, q) == kNoColumn) continue;
            row[lay.at(k, q)] = g.potential[k] * g.energy[g.unflat(k).j];
            any = true;
        }
        if (any) idx.capacity[q] = p.add_ineq(std::move(row), s.stations[q].capacity_kwh);
    }

    if (network && s.network) {
        for (const LoadRow& lr : network_rows(s)) {
            std::vector<double> row(lay.num_cols, 0.0);
            for (std::size_t k = 0; k < g.size(); ++k) {
                for (std::size_t q = 0; q < S; ++q) {
                    if (lay.at(k, q) != kNoColumn) row[lay.at(k, q)] = lr.coef[k][q];
                }
            }
            idx.line.push_back(p.add_ineq(std::move(row), lr.limit));
        }
    }
    return idx;
}

std::vector<std::vector<double>> extract_h(const lp::Solution& sol, const BdpLayout& lay) {
    std::vector<std::vector<double>> h(lay.col.size(), std::vector<double>(lay.num_stations + 1, 0.0));
    for (std::size_t k = 0; k < lay.col.size(); ++k) {
        for (std::size_t q = 0; q <= lay.num_stations; ++q) {
            if (lay.at(k, q) != kNoColumn) h[k][q] = std::max(0.0, sol.x[lay.at(k, q)]);
        }
    }
    return h;
}

void station_marginals(const Scenario& s, const RowIndex& rows, const lp::Solution& sol,
                       std::vector<double>& capacity_dual, std::vector<double>& line_dual,
                       std::vector<double>& marginal) {
    const std::size_t S = s.num_stations();
    capacity_dual.assign(S, 0.0);
    for (std::size_t q = 0; q < S; ++q) {
        if (rows.capacity[q] != kNoColumn) capacity_dual[q] = sol.ineq_duals[rows.capacity[q]];
    }
    line_dual.assign(rows.line.size(), 0.0);
    for (std::size_t l = 0; l < rows.line.size(); ++l) line_dual[l] = sol.ineq_duals[rows.line[l]];
    marginal = capacity_dual;
    if (!rows.line.empty()) {
        const auto sens = line_sensitivity(s);
        for (std::size_t l = 0; l < rows.line.size(); ++l) {
            for (std::size_t q = 0; q < S; ++q) marginal[q] += line_dual[l] * sens[l][q];
        }
    }
}

}  // namespace evmenu::detail
