#include "evmenu/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace evmenu {

namespace {

double utility(const Scenario& s, std::size_t k, std::size_t q) {
    const TypeGrid& g = s.types;
    const TypeIndex t = g.unflat(k);
    const Station& st = s.stations[q];
    return g.reward_of(t) - g.vot[t.i] * (st.detour_h + st.queue_h) - g.energy[t.j] * st.lmp;
}

}  // namespace

SelfRoutingAssignment make_assignment(const Scenario& s, std::vector<std::vector<double>> mass) {
    const TypeGrid& g = s.types;
    SelfRoutingAssignment a;
    a.residual.resize(s.num_stations());
    for (std::size_t q = 0; q < s.num_stations(); ++q) a.residual[q] = s.stations[q].capacity_kwh;
    for (std::size_t k = 0; k < g.size(); ++k) {
        for (std::size_t q = 0; q < s.num_stations(); ++q) a.residual[q] -= mass[k][q] * g.energy[g.unflat(k).j];
    }
    a.mass = std::move(mass);
    return a;
}

double default_quantum(const Scenario& s) {
    double lo = kInf;
    for (double lam : s.types.potential) {
        if (lam > 0.0) lo = std::min(lo, lam);
    }
    return std::isfinite(lo) ? lo / 10.0 : 1.0;
}

double parcel_size(double potential, double quantum) {
    const double n = std::max(1.0, std::round(potential / quantum));
    return potential / n;
}

EquilibriumWitness verify_equilibrium(const SelfRoutingAssignment& a, const Scenario& s, double quantum, double tol) {
    const TypeGrid& g = s.types;
    if (quantum <= 0.0) quantum = default_quantum(s);
    EquilibriumWitness w;
    auto record = [&](std::size_t k, std::optional<std::size_t> q, double gain) {
        if (gain > w.gain) w = {false, k, q, gain};
    };
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.potential[k] <= 0.0) continue;
        const TypeIndex t = g.unflat(k);
        const auto& G = s.preferences[t.l].stations;
        const double need = parcel_size(g.potential[k], quantum) * g.energy[t.j];
        double served = 0.0;
        for (std::size_t q : G) served += a.mass[k][q];
        auto room = [&](std::size_t q) { return a.residual[q] >= need - 1e-9 * std::max(1.0, need); };
        for (std::size_t q : G) {
            if (a.mass[k][q] <= tol) continue;
            const double u = utility(s, k, q);
            if (u < -tol) record(k, std::nullopt, -u);
            for (std::size_t q2 : G) {
                const double gain = utility(s, k, q2) - u;
                if (q2 != q && gain > tol && room(q2)) record(k, q2, gain);
            }
        }
        if (g.potential[k] - served > tol) {
            for (std::size_t q2 : G) {
                const double u = utility(s, k, q2);
                if (u > tol && room(q2)) record(k, q2, u);
            }
        }
    }
    return w;
}

double assignment_welfare(const SelfRoutingAssignment& a, const Scenario& s) {
    double w = 0.0;
    for (std::size_t k = 0; k < s.types.size(); ++k) {
        for (std::size_t q = 0; q < s.num_stations(); ++q) {
            if (a.mass[k][q] != 0.0) w += a.mass[k][q] * utility(s, k, q);
        }
    }
    return w;
}

std::vector<Equilibrium> enumerate_equilibria(const Scenario& s, double quantum) {
    const TypeGrid& g = s.types;
    if (quantum <= 0.0) quantum = default_quantum(s);
    const std::size_t S = s.num_stations();

    std::vector<std::size_t> types;
    std::vector<int> parcels;
    std::size_t cells = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.potential[k] <= 0.0) continue;
        const int n = static_cast<int>(std::max(1.0, std::round(g.potential[k] / quantum)));
        if (n > 20) throw std::invalid_argument("enumerate_equilibria: more than 20 parcels for one type");
        types.push_back(k);
        parcels.push_back(n);
        cells += s.preferences[g.unflat(k).l].stations.size();
    }
    if (cells > 12) throw std::invalid_argument("enumerate_equilibria: more than 12 type-station cells");

    std::vector<std::vector<double>> mass(g.size(), std::vector<double>(S, 0.0));
    std::vector<double> residual(S);
    for (std::size_t q = 0; q < S; ++q) residual[q] = s.stations[q].capacity_kwh;
    std::map<std::pair<std::vector<bool>, long long>, Equilibrium> found;

    auto fits = [&](std::size_t q, double kwh) { return kwh <= residual[q] + 1e-9 * std::max(1.0, kwh); };

    auto leaf = [&]() {
        SelfRoutingAssignment a = make_assignment(s, mass);
        if (!verify_equilibrium(a, s, quantum).ok) return;
        const double w = assignment_welfare(a, s);
        std::vector<bool> support;
        for (const auto& row : mass) {
            for (double m : row) support.push_back(m > 1e-12);
        }
        const auto key = std::make_pair(support, std::llround(w * 1e6));
        if (!found.count(key)) found.emplace(key, Equilibrium{std::move(a), w, quantum});
    };

    // The last type best-responds to the residuals: fill utility levels from
    // the top, enumerating splits inside tied levels.
    auto greedy_last = [&](std::size_t a) {
        const std::size_t k = types[a];
        const TypeIndex t = g.unflat(k);
        const double unit = g.potential[k] / parcels[a], e = g.energy[t.j];
        std::vector<std::size_t> G = s.preferences[t.l].stations;
        std::stable_sort(G.begin(), G.end(), [&](std::size_t x, std::size_t y) { return utility(s, k, x) > utility(s, k, y); });
        std::vector<std::vector<std::size_t>> levels;
        for (std::size_t q : G) {
            if (utility(s, k, q) < -1e-9) break;
            if (levels.empty() || std::abs(utility(s, k, levels.back().front()) - utility(s, k, q)) > 1e-9)
                levels.push_back({});
            levels.back().push_back(q);
        }
        std::function<void(std::size_t, int)> level_step;
        std::function<void(std::size_t, std::size_t, int, int)> split;
        // Distribute exactly `take` parcels over the stations of level L.
        split = [&](std::size_t L, std::size_t pos, int take, int left) {
            const auto& lv = levels[L];
            if (pos == lv.size()) {
                if (take == 0) level_step(L + 1, left);
                return;
            }
            const std::size_t q = lv[pos];
            for (int n = 0; n <= take; ++n) {
                if (!fits(q, n * unit * e)) break;
                mass[k][q] += n * unit;
                residual[q] -= n * unit * e;
                split(L, pos + 1, take - n, left);
                mass[k][q] -= n * unit;
                residual[q] += n * unit * e;
            }
        };
        level_step = [&](std::size_t L, int left) {
            if (L == levels.size() || left == 0) {
                leaf();
                return;
            }
            int room = 0;
            for (std::size_t q : levels[L]) room += static_cast<int>(std::floor(residual[q] / (unit * e) + 1e-9));
            const int fill = std::min(left, room);
            const bool indifferent = std::abs(utility(s, k, levels[L].front())) <= 1e-9;
            for (int take = indifferent ? 0 : fill; take <= fill; ++take) split(L, 0, take, left - take);
        };
        level_step(0, parcels[a]);
    };

    std::function<void(std::size_t)> over_types = [&](std::size_t a) {
        if (a + 1 >= types.size()) {
            if (types.empty()) leaf();
            else greedy_last(a);
            return;
        }
        const std::size_t k = types[a];
        const TypeIndex t = g.unflat(k);
        const double unit = g.potential[k] / parcels[a], e = g.energy[t.j];
        const auto& G = s.preferences[t.l].stations;
        std::function<void(std::size_t, int)> cells_step = [&](std::size_t c, int left) {
            if (c == G.size()) {
                over_types(a + 1);  // remaining parcels stay unserved
                return;
            }
            const std::size_t q = G[c];
            for (int n = 0; n <= left; ++n) {
                if (!fits(q, n * unit * e)) break;
                mass[k][q] += n * unit;
                residual[q] -= n * unit * e;
                cells_step(c + 1, left - n);
                mass[k][q] -= n * unit;
                residual[q] += n * unit * e;
            }
        };
        cells_step(0, parcels[a]);
    };
    over_types(0);

    std::vector<Equilibrium> out;
    for (auto& [key, eq] : found) out.push_back(std::move(eq));
    std::stable_sort(out.begin(), out.end(), [](const Equilibrium& x, const Equilibrium& y) { return x.welfare < y.welfare; });
    return out;
}

nlohmann::json to_json(const std::vector<Equilibrium>& eqs, const Scenario& s) {
    const TypeGrid& g = s.types;
    nlohmann::json out = nlohmann::json::array();
    for (const Equilibrium& eq : eqs) {
        nlohmann::json masses = nlohmann::json::array();
        for (std::size_t k = 0; k < g.size(); ++k) {
            const TypeIndex t = g.unflat(k);
            for (std::size_t q = 0; q < s.num_stations(); ++q) {
                if (eq.assignment.mass[k][q] <= 0.0) continue;
                masses.push_back({{"i", t.i + 1}, {"j", t.j + 1}, {"ell", t.l + 1}, {"q", q + 1}, {"mass", eq.assignment.mass[k][q]}});
            }
        }
        out.push_back({{"assignment", masses}, {"welfare", eq.welfare}, {"quantum", eq.quantum}});
    }
    return out;
}

}  // namespace evmenu
