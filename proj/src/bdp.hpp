#pragma once

// Column layout and shared rows of the h-allocation LPs.

#include <cstddef>
#include <functional>
#include <vector>

#include "evmenu/lp.hpp"
#include "evmenu/model.hpp"
#include "evmenu/welfare.hpp"

namespace evmenu::detail {

inline constexpr std::size_t kNoColumn = static_cast<std::size_t>(-1);

struct BdpLayout {
    std::size_t num_stations = 0;                 // physical plus solar; virtual is index num_stations
    std::vector<std::vector<std::size_t>> col;    // [type][station or virtual] -> LP column
    std::vector<bool> active;                     // type has columns
    std::size_t num_cols = 0;

    std::size_t at(std::size_t k, std::size_t q) const { return col[k][q]; }
};

BdpLayout make_layout(const Scenario& s, const std::function<bool(std::size_t)>& include_type,
                      const std::function<bool(std::size_t, std::size_t)>& allow_station,
                      const std::function<bool(std::size_t)>& allow_virtual);

struct RowIndex {
    std::vector<std::size_t> simplex;   // per type, eq row or kNoColumn
    std::vector<std::size_t> capacity;  // per station, ineq row or kNoColumn
    std::vector<std::size_t> line;      // per line, ineq row or kNoColumn
};

// Sum over G_l plus virtual of h = 1 for every active type; station capacity
// rows; optional line rows.
RowIndex add_common_rows(lp::Problem& p, const Scenario& s, const BdpLayout& lay, bool network);

std::vector<std::vector<double>> extract_h(const lp::Solution& sol, const BdpLayout& lay);

// Dual-derived marginal price per station: capacity dual plus line duals
// through the sensitivity matrix.
void station_marginals(const Scenario& s, const RowIndex& rows, const lp::Solution& sol,
                       std::vector<double>& capacity_dual, std::vector<double>& line_dual,
                       std::vector<double>& marginal);

}  // namespace evmenu::detail
