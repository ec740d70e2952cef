#include "evmenu/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bdp.hpp"

namespace evmenu {

using detail::kNoColumn;

StationOrder station_order(const Scenario& s) {
    const TypeGrid& g = s.types;
    const std::size_t Q = s.outside_option();
    const double v1 = g.vot.front(), eE = g.energy.back();
    StationOrder out;
    out.o.resize(s.num_stations());
    for (std::size_t q = 0; q < s.num_stations(); ++q) {
        out.o[q] = v1 * (s.stations[q].detour_h - s.stations[Q].detour_h) +
                   eE * (s.stations[q].lmp - s.stations[Q].lmp);
    }
    // snap round-off so exact ties fall back to index order
    double scale = 1.0;
    for (double x : out.o) scale = std::max(scale, std::abs(x));
    const double eps = 1e-9 * scale;
    for (double& x : out.o) x = std::round(x / eps) * eps;
    out.order.resize(s.num_stations());
    std::iota(out.order.begin(), out.order.end(), 0);
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return out.o[a] < out.o[b]; });
    return out;
}

AdmissibleSets admissible_sets(const Scenario& s) {
    const TypeGrid& g = s.types;
    const std::size_t Q = s.outside_option();
    const Station& out = s.stations[Q];
    AdmissibleSets sets;
    sets.station.resize(s.num_stations());
    for (std::size_t q = 0; q < s.num_stations(); ++q) {
        sets.station[q] = g.vot.back() * (s.stations[q].detour_h - out.detour_h) +
                              g.energy.front() * (s.stations[q].lmp - out.lmp) <=
                          0.0;
    }
    sets.type.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const TypeIndex t = g.unflat(k);
        const double r = g.reward_of(t);
        sets.type[k] = r > 0.0 && r - (g.vot[t.i] * out.detour_h + g.energy[t.j] * out.lmp) >= 0.0;
    }
    return sets;
}

Station make_virtual_station(const Scenario& s) {
    const TypeGrid& g = s.types;
    double max_r = 0.0;
    for (const auto& per_pref : g.reward) max_r = std::max(max_r, per_pref.back());
    Station v;
    v.detour_h = max_r / g.vot.front() + 1.0;
    v.lmp = 0.0;
    v.capacity_kwh = kInf;
    v.is_virtual = true;
    return v;
}

std::vector<std::vector<double>> line_sensitivity(const Scenario& s) {
    if (!s.network) return {};
    const DistributionNetwork& n = *s.network;
    std::size_t physical = 0;
    for (const Station& st : s.stations) physical += st.is_virtual ? 0 : 1;
    if (n.line_limits.size() != n.num_lines()) throw std::invalid_argument("network: f has wrong length");
    for (const auto& row : n.ptdf) {
        if (row.size() != n.num_buses()) throw std::invalid_argument("network: D columns differ from E rows");
    }
    for (const auto& row : n.station_bus) {
        if (row.size() < physical) throw std::invalid_argument("network: E has fewer columns than stations");
    }
    std::vector<std::vector<double>> out(n.num_lines(), std::vector<double>(s.num_stations(), 0.0));
    for (std::size_t l = 0; l < n.num_lines(); ++l) {
        for (std::size_t q = 0; q < s.num_stations(); ++q) {
            const std::size_t host = s.physical_station(q);
            double v = 0.0;
            for (std::size_t b = 0; b < n.num_buses(); ++b) v += n.ptdf[l][b] * n.station_bus[b][host];
            out[l][q] = v;
        }
    }
    return out;
}

std::vector<LoadRow> network_rows(const Scenario& s) {
    std::vector<LoadRow> rows;
    if (!s.network) return rows;
    const TypeGrid& g = s.types;
    const auto sens = line_sensitivity(s);
    for (std::size_t l = 0; l < sens.size(); ++l) {
        LoadRow r;
        r.line = l;
        r.limit = s.network->line_limits[l];
        r.coef.assign(g.size(), std::vector<double>(s.num_stations(), 0.0));
        for (std::size_t k = 0; k < g.size(); ++k) {
            const double scale = g.potential[k] * g.energy[g.unflat(k).j];
            for (std::size_t q = 0; q < s.num_stations(); ++q) r.coef[k][q] = sens[l][q] * scale;
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

Scenario solarize(const Scenario& s, const std::vector<double>& solar_kwh) {
    Scenario out = s;
    const std::size_t physical = s.num_stations();
    for (std::size_t q = 0; q < std::min(physical, solar_kwh.size()); ++q) {
        if (solar_kwh[q] < 0.0) throw std::invalid_argument("solar availability must be nonnegative");
        if (solar_kwh[q] == 0.0 || s.stations[q].is_virtual) continue;
        Station v;
        v.detour_h = s.stations[q].detour_h;
        v.lmp = 0.0;
        v.capacity_kwh = solar_kwh[q];
        v.queue_h = s.stations[q].queue_h;
        v.is_virtual = true;
        v.host = q;
        const std::size_t idx = out.stations.size();
        out.stations.push_back(v);
        for (TravelPreference& p : out.preferences) {
            if (p.contains(q)) p.stations.push_back(idx);
        }
    }
    return out;
}

std::size_t posted_station(const Scenario& s, TypeIndex t, const std::vector<double>& marginal) {
    const TypeGrid& g = s.types;
    std::size_t best = kNoColumn;
    double best_u = -kInf;
    for (std::size_t q : s.preferences[t.l].stations) {
        const double u = -g.vot[t.i] * s.stations[q].detour_h - g.energy[t.j] * (s.stations[q].lmp + marginal[q]);
        if (u > best_u + 1e-12) {
            best_u = u;
            best = q;
        }
    }
    return best;
}

void fill_waits(Policy& policy, const Scenario& s) {
    policy.wait.resize(policy.routing.size());
    for (std::size_t k = 0; k < policy.routing.size(); ++k) policy.wait[k] = expected_wait(policy.routing[k], s.stations);
}

std::vector<double> station_loads(const Policy& policy, const Scenario& s) {
    const TypeGrid& g = s.types;
    std::vector<double> load(s.num_stations(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double e = g.energy[g.unflat(k).j];
        for (std::size_t q = 0; q < s.num_stations(); ++q) load[q] += policy.lambda[k] * e * policy.routing[k][q];
    }
    return load;
}

SocialResult solve_social(const Scenario& s, const SocialOptions& options) {
    const TypeGrid& g = s.types;
    const std::size_t S = s.num_stations();
    const AdmissibleSets adm = admissible_sets(s);

    SocialResult res;
    res.virtual_station = make_virtual_station(s);

    const auto lay = detail::make_layout(
        s, [&](std::size_t k) { return g.potential[k] > 0.0; },
        [&](std::size_t k, std::size_t q) {
            return !options.restrict_to_admissible || (adm.station[q] && adm.type[k]);
        },
        [](std::size_t) { return true; });

    lp::Problem p(lay.num_cols);
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!lay.active[k]) continue;
        const TypeIndex t = g.unflat(k);
        const double lam = g.potential[k], v = g.vot[t.i], e = g.energy[t.j], r = g.reward_of(t);
        for (std::size_t q = 0; q < S; ++q) {
            if (lay.at(k, q) == kNoColumn) continue;
            const Station& st = s.stations[q];
            p.objective[lay.at(k, q)] = lam * (r - v * (st.detour_h + st.queue_h) - e * st.lmp);
        }
        if (options.virtual_column == VirtualColumn::Literal)
            p.objective[lay.at(k, S)] = lam * (r - v * res.virtual_station.detour_h);
    }
    const auto rows = detail::add_common_rows(p, s, lay, options.network);

    res.lp = lp::solve(p);
    if (!res.lp.optimal()) return res;

    res.h = detail::extract_h(res.lp, lay);
    detail::station_marginals(s, rows, res.lp, res.capacity_dual, res.line_dual, res.marginal);

    Policy& pol = res.policy;
    pol.lambda.assign(g.size(), 0.0);
    pol.routing.assign(g.size(), std::vector<double>(S, 0.0));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const TypeIndex t = g.unflat(k);
        double admitted = 0.0;
        if (lay.active[k]) {
            for (std::size_t q = 0; q < S; ++q) admitted += res.h[k][q];
        }
        if (admitted > 1e-12) {
            pol.lambda[k] = g.potential[k] * std::min(1.0, admitted);
            for (std::size_t q = 0; q < S; ++q) pol.routing[k][q] = res.h[k][q] / admitted;
        } else {
            pol.routing[k][posted_station(s, t, res.marginal)] = 1.0;
        }
    }
    fill_waits(pol, s);
    pol.price = social_prices(pol, res.marginal, s);

    res.bdp_objective = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!lay.active[k]) continue;
        for (std::size_t q = 0; q <= S; ++q) {
            if (lay.at(k, q) != kNoColumn) res.bdp_objective += p.objective[lay.at(k, q)] * res.h[k][q];
        }
    }
    return res;
}

std::vector<double> social_prices(const Policy& policy, const std::vector<double>& marginal, const Scenario& s) {
    const TypeGrid& g = s.types;
    std::vector<double> price(g.size(), 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double e = g.energy[g.unflat(k).j];
        double unit = 0.0;
        for (std::size_t q = 0; q < s.num_stations(); ++q) {
            unit += (s.stations[q].lmp + (q < marginal.size() ? marginal[q] : 0.0)) * policy.routing[k][q];
        }
        price[k] = unit * e;
    }
    return price;
}

double evaluate_welfare(const Policy& policy, const Scenario& s) {
    const TypeGrid& g = s.types;
    double w = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (policy.lambda[k] == 0.0) continue;
        const TypeIndex t = g.unflat(k);
        double energy_cost = 0.0;
        for (std::size_t q = 0; q < s.num_stations(); ++q) energy_cost += s.stations[q].lmp * policy.routing[k][q];
        const double wait = expected_wait(policy.routing[k], s.stations);
        w += policy.lambda[k] * (g.reward_of(t) - g.vot[t.i] * wait - g.energy[t.j] * energy_cost);
    }
    return w;
}

}  // namespace evmenu
