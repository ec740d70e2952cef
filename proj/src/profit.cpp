#include "evmenu/profit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bdp.hpp"
#include "evmenu/welfare.hpp"

namespace evmenu {

using detail::kNoColumn;

namespace {

constexpr double kChainTol = 1e-9;

double effective_detour(const Station& st) { return st.detour_h + st.queue_h; }

}  // namespace

ProfitMenu profit_prices(const std::vector<double>& waits, const Scenario& s) {
    const TypeGrid& g = s.types;
    const std::size_t V = g.num_vot(), E = g.num_energy(), B = g.num_pref();
    if (waits.size() != g.size()) throw std::invalid_argument("profit_prices: wait vector does not match the grid");
    auto at = [&](std::size_t i, std::size_t j, std::size_t l) { return g.flat({i, j, l}); };

    for (std::size_t l = 0; l < B; ++l) {
        const double cap = g.reward[l][0] / g.vot[0];
        for (std::size_t j = 0; j < E; ++j) {
            if (waits[at(0, j, l)] > cap + kChainTol * std::max(1.0, cap)) {
                std::ostringstream os;
                os << "wait chain broken: W(1," << j + 1 << "," << l + 1 << ") exceeds R_1/v_1";
                throw std::domain_error(os.str());
            }
            for (std::size_t i = 0; i + 1 < V; ++i) {
                if (waits[at(i + 1, j, l)] > waits[at(i, j, l)] + kChainTol) {
                    std::ostringstream os;
                    os << "wait chain broken: W(" << i + 2 << "," << j + 1 << "," << l + 1 << ") > W(" << i + 1
                       << "," << j + 1 << "," << l + 1 << ")";
                    throw std::domain_error(os.str());
                }
            }
        }
    }

    ProfitMenu menu;
    menu.wait = waits;
    menu.price.assign(g.size(), 0.0);
    std::vector<double> alt(g.size(), 0.0);
    for (std::size_t l = 0; l < B; ++l) {
        const double r1 = g.reward[l][0];
        // canonical: j-sweep at i = 1, then i-sweep per energy
        menu.price[at(0, 0, l)] = r1 - g.vot[0] * waits[at(0, 0, l)];
        for (std::size_t j = 0; j + 1 < E; ++j) {
            menu.price[at(0, j + 1, l)] =
                menu.price[at(0, j, l)] + g.vot[0] * (waits[at(0, j, l)] - waits[at(0, j + 1, l)]);
        }
        for (std::size_t j = 0; j < E; ++j) {
            for (std::size_t i = 0; i + 1 < V; ++i) {
                menu.price[at(i + 1, j, l)] =
                    menu.price[at(i, j, l)] + g.vot[i + 1] * (waits[at(i, j, l)] - waits[at(i + 1, j, l)]);
            }
        }
        // transposed: i-sweep at j = 1, then j-sweep per VoT
        alt[at(0, 0, l)] = menu.price[at(0, 0, l)];
        for (std::size_t i = 0; i + 1 < V; ++i) {
            alt[at(i + 1, 0, l)] = alt[at(i, 0, l)] + g.vot[i + 1] * (waits[at(i, 0, l)] - waits[at(i + 1, 0, l)]);
        }
        for (std::size_t i = 0; i < V; ++i) {
            for (std::size_t j = 0; j + 1 < E; ++j) {
                alt[at(i, j + 1, l)] = alt[at(i, j, l)] + g.vot[i] * (waits[at(i, j, l)] - waits[at(i, j + 1, l)]);
            }
        }
    }
    for (std::size_t k = 0; k < g.size(); ++k)
        menu.path_discrepancy = std::max(menu.path_discrepancy, std::abs(menu.price[k] - alt[k]));
    return menu;
}

namespace {

ProfitResult solve_profit_lp(const Scenario& s, const ProfitOptions& options, bool allow_deferral) {
    const TypeGrid& g = s.types;
    const std::size_t V = g.num_vot(), E = g.num_energy(), B = g.num_pref();
    const std::size_t S = s.num_stations();
    const Station virt = make_virtual_station(s);

    // Every type gets columns: zero-rate types still anchor the price recursion.
    // Only the lowest VoT may be deferred; its IR constraint always binds.
    const auto lay = detail::make_layout(
        s, [](std::size_t) { return true; }, [](std::size_t, std::size_t) { return true; },
        [&](std::size_t k) { return allow_deferral && g.unflat(k).i == 0; });

    lp::Problem p(lay.num_cols);
    auto at = [&](std::size_t i, std::size_t j, std::size_t l) { return g.flat({i, j, l}); };
    auto detour = [&](std::size_t q) { return q == S ? effective_detour(virt) : effective_detour(s.stations[q]); };

    // Rent multiplier on W_{i,j,l}: (v_{i+1} - v_i) * sum_{m>i} Lambda_{m,j',l}.
    std::vector<double> rent(g.size(), 0.0);
    for (std::size_t l = 0; l < B; ++l) {
        for (std::size_t j = 0; j < E; ++j) {
            for (std::size_t i = 0; i + 1 < V; ++i) {
                double above = 0.0;
                for (std::size_t m = i + 1; m < V; ++m) above += g.potential[at(m, j, l)];
                const std::size_t target = options.rent == RentIndex::Verbatim ? at(i, 0, l) : at(i, j, l);
                rent[target] += (g.vot[i + 1] - g.vot[i]) * above;
            }
        }
    }

    for (std::size_t k = 0; k < g.size(); ++k) {
        const TypeIndex t = g.unflat(k);
        const double lam = g.potential[k], v = g.vot[t.i], e = g.energy[t.j], r1 = g.reward[t.l][0];
        for (std::size_t q = 0; q <= S; ++q) {
            if (lay.at(k, q) == kNoColumn) continue;
            const double theta = q == S ? 0.0 : s.stations[q].lmp;
            p.objective[lay.at(k, q)] = lam * (r1 - v * detour(q) - e * theta) + rent[k] * detour(q);
        }
    }
    const auto rows = detail::add_common_rows(p, s, lay, options.network);

    // W_k as a row over h.
    auto wait_row = [&](std::size_t k, double scale, std::vector<double>& row) {
        for (std::size_t q = 0; q <= S; ++q) {
            if (lay.at(k, q) != kNoColumn) row[lay.at(k, q)] += scale * detour(q);
        }
    };
    // sum_{t<i} (v_{t+1} - v_t) W_{t,j,l} scaled by `sign`
    auto rent_sum = [&](std::size_t i, std::size_t j, std::size_t l, double sign, std::vector<double>& row) {
        for (std::size_t t = 0; t < i; ++t) wait_row(at(t, j, l), sign * (g.vot[t + 1] - g.vot[t]), row);
    };

    for (std::size_t l = 0; l < B; ++l) {
        const double r1 = g.reward[l][0];
        for (std::size_t j = 0; j < E; ++j) {
            {
                std::vector<double> row(lay.num_cols, 0.0);
                wait_row(at(0, j, l), 1.0, row);
                p.add_ineq(std::move(row), r1 / g.vot[0]);
            }
            for (std::size_t i = 0; i + 1 < V; ++i) {
                std::vector<double> row(lay.num_cols, 0.0);
                wait_row(at(i + 1, j, l), 1.0, row);
                wait_row(at(i, j, l), -1.0, row);
                p.add_ineq(std::move(row), 0.0);
            }
            for (std::size_t i = 1; i < V; ++i) {
                if (j + 1 < E) {
                    std::vector<double> row(lay.num_cols, 0.0);
                    rent_sum(i, j, l, 1.0, row);
                    rent_sum(i, j + 1, l, -1.0, row);
                    p.add_ineq(std::move(row), 0.0);
                }
                std::vector<double> ir(lay.num_cols, 0.0);
                rent_sum(i, j, l, 1.0, ir);
                p.add_ineq(std::move(ir), g.reward[l][i] - r1);
            }
            for (std::size_t m : s.subset_preferences(l)) {
                for (std::size_t i = 0; i < V; ++i) {
                    std::vector<double> row(lay.num_cols, 0.0);
                    rent_sum(i, j, l, 1.0, row);
                    rent_sum(i, j, m, -1.0, row);
                    p.add_ineq(std::move(row), g.reward[m][0] - r1);
                }
            }
        }
    }

    ProfitResult res;
    res.lp = lp::solve(p);
    if (!res.lp.optimal()) return res;
    res.h = detail::extract_h(res.lp, lay);
    res.lp_objective = res.lp.objective;

    std::vector<double> menu_wait(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (std::size_t q = 0; q <= S; ++q) menu_wait[k] += detour(q) * res.h[k][q];
    }
    // Clamp round-off so the chain check sees exact LP feasibility.
    for (std::size_t l = 0; l < B; ++l) {
        for (std::size_t j = 0; j < E; ++j) {
            double& w1 = menu_wait[at(0, j, l)];
            w1 = std::min(w1, g.reward[l][0] / g.vot[0]);
            for (std::size_t i = 0; i + 1 < V; ++i) {
                double& w = menu_wait[at(i + 1, j, l)];
                w = std::min(w, menu_wait[at(i, j, l)]);
            }
        }
    }
    res.menu = profit_prices(menu_wait, s);

    Policy& pol = res.policy;
    pol.lambda.assign(g.size(), 0.0);
    pol.routing.assign(g.size(), std::vector<double>(S, 0.0));
    for (std::size_t k = 0; k < g.size(); ++k) {
        double served = 0.0;
        for (std::size_t q = 0; q < S; ++q) served += res.h[k][q];
        if (served <= 1e-12) continue;  // unreachable: the chain caps the deferred share below 1
        pol.lambda[k] = g.potential[k] * std::min(1.0, served);
        for (std::size_t q = 0; q < S; ++q) pol.routing[k][q] = res.h[k][q] / served;
    }
    fill_waits(pol, s);
    pol.price = res.menu.price;
    return res;
}

}  // namespace

ProfitResult solve_profit(const Scenario& s, const ProfitOptions& options) {
    // Deferral lets the LP trade admission for longer lowest-VoT waits, which
    // it always does once available; keep it for when full service cannot fit.
    if (options.deferral == Deferral::Always) return solve_profit_lp(s, options, true);
    ProfitResult res = solve_profit_lp(s, options, false);
    if (res.lp.status == lp::Status::Infeasible) res = solve_profit_lp(s, options, true);
    return res;
}

double evaluate_profit(const Policy& policy, const ProfitMenu& menu, const Scenario& s) {
    const TypeGrid& g = s.types;
    double total = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (policy.lambda[k] == 0.0) continue;
        double energy = 0.0;
        for (std::size_t q = 0; q < s.num_stations(); ++q) energy += s.stations[q].lmp * policy.routing[k][q];
        total += policy.lambda[k] * (menu.price[k] - g.energy[g.unflat(k).j] * energy);
    }
    return total;
}

double reduced_profit_objective(const Policy& policy, const ProfitMenu& menu, const Scenario& s, RentIndex rent) {
    const TypeGrid& g = s.types;
    const std::size_t V = g.num_vot(), E = g.num_energy(), B = g.num_pref();
    double total = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const TypeIndex t = g.unflat(k);
        double energy = 0.0;
        for (std::size_t q = 0; q < s.num_stations(); ++q) energy += s.stations[q].lmp * policy.routing[k][q];
        total += policy.lambda[k] * (g.reward[t.l][0] - g.vot[t.i] * menu.wait[k] - g.energy[t.j] * energy);
    }
    for (std::size_t l = 0; l < B; ++l) {
        for (std::size_t j = 0; j < E; ++j) {
            for (std::size_t i = 0; i + 1 < V; ++i) {
                double above = 0.0;
                for (std::size_t m = i + 1; m < V; ++m) above += policy.lambda[g.flat({m, j, l})];
                const std::size_t jr = rent == RentIndex::Verbatim ? 0 : j;
                total += (g.vot[i + 1] - g.vot[i]) * menu.wait[g.flat({i, jr, l})] * above;
            }
        }
    }
    return total;
}

}  // namespace evmenu
