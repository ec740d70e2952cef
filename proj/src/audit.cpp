#include "evmenu/audit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "evmenu/welfare.hpp"

namespace evmenu {

bool AuditReport::empty() const { return size() == 0 && local_matches_global; }

std::vector<const AuditEntry*> AuditReport::all() const {
    std::vector<const AuditEntry*> out;
    for (const auto* list : {&ic_vertical, &ic_horizontal, &ic_preference, &local_ic, &ir, &wait_monotonicity,
                             &border_structure}) {
        for (const AuditEntry& e : *list) out.push_back(&e);
    }
    return out;
}

std::size_t AuditReport::size() const { return all().size(); }

nlohmann::json to_json(const AuditReport& report, const TypeGrid& grid) {
    auto type_json = [&](std::size_t k) -> nlohmann::json {
        if (k == kNoType) return nullptr;
        if (k >= grid.size()) return k;
        const TypeIndex t = grid.unflat(k);
        return nlohmann::json::array({t.i + 1, t.j + 1, t.l + 1});
    };
    nlohmann::json entries = nlohmann::json::array();
    for (const AuditEntry* e : report.all()) {
        const bool about_station = e->check.rfind("lemma", 0) == 0 || e->check.rfind("fill", 0) == 0;
        nlohmann::json other = nullptr;
        if (e->other != kNoType) other = about_station ? nlohmann::json(e->other + 1) : type_json(e->other);
        entries.push_back({{"check", e->check},
                           {"type", type_json(e->type)},
                           {"other", other},
                           {"lhs", e->lhs},
                           {"rhs", e->rhs},
                           {"violation", e->violation}});
    }
    if (!report.local_matches_global) {
        entries.push_back({{"check", "local_ic_disagrees_with_pairwise"},
                           {"type", nullptr},
                           {"other", nullptr},
                           {"lhs", 0.0},
                           {"rhs", 0.0},
                           {"violation", 1.0}});
    }
    return entries;
}

namespace {

struct Pricing {
    const Menu& menu;
    const TypeGrid& g;
    // Utility of type `who` buying option `opt`.
    double utility(std::size_t who, std::size_t opt) const {
        const TypeIndex t = g.unflat(who);
        return g.reward_of(t) - g.vot[t.i] * menu.wait[opt] - menu.price[opt];
    }
};

// Records opt-over-own gains beyond tol; returns true if it passed.
bool check_pair(const Pricing& pr, const char* name, std::size_t who, std::size_t opt, double tol,
                std::vector<AuditEntry>& out) {
    const double own = pr.utility(who, who), alt = pr.utility(who, opt);
    const double gain = alt - own;
    if (gain > tol) {
        out.push_back({name, who, opt, alt, own, gain});
        return false;
    }
    return true;
}

}  // namespace

AuditReport audit(const Menu& menu, const std::vector<double>& lambda, const Scenario& s, const AuditOptions& opt) {
    const TypeGrid& g = s.types;
    const std::size_t V = g.num_vot(), E = g.num_energy(), B = g.num_pref();
    if (menu.price.size() != g.size() || menu.wait.size() != g.size() || lambda.size() != g.size())
        throw std::invalid_argument("audit: menu shape does not match the type grid");
    const Pricing pr{menu, g};
    const double tol = opt.tol;
    AuditReport rep;
    auto at = [&](std::size_t i, std::size_t j, std::size_t l) { return g.flat({i, j, l}); };

    // Pairwise IC.
    for (std::size_t l = 0; l < B; ++l) {
        const auto below = s.subset_preferences(l);
        for (std::size_t i = 0; i < V; ++i) {
            for (std::size_t j = 0; j < E; ++j) {
                const std::size_t me = at(i, j, l);
                for (std::size_t m = 0; m < V; ++m) {
                    if (m != i) check_pair(pr, "ic_vertical", me, at(m, j, l), tol, rep.ic_vertical);
                }
                for (std::size_t k = j + 1; k < E; ++k) check_pair(pr, "ic_horizontal", me, at(i, k, l), tol, rep.ic_horizontal);
                for (std::size_t t : below) check_pair(pr, "ic_preference", me, at(i, j, t), tol, rep.ic_preference);
            }
        }
    }

    // Local IC: adjacent VoT both ways, next energy, covering preferences.
    for (std::size_t l = 0; l < B; ++l) {
        const auto cover = s.covered_preferences(l);
        for (std::size_t i = 0; i < V; ++i) {
            for (std::size_t j = 0; j < E; ++j) {
                const std::size_t me = at(i, j, l);
                if (i > 0) check_pair(pr, "local_ic_vertical", me, at(i - 1, j, l), tol, rep.local_ic);
                if (i + 1 < V) check_pair(pr, "local_ic_vertical", me, at(i + 1, j, l), tol, rep.local_ic);
                if (j + 1 < E) check_pair(pr, "local_ic_horizontal", me, at(i, j + 1, l), tol, rep.local_ic);
                for (std::size_t t : cover) check_pair(pr, "local_ic_preference", me, at(i, j, t), tol, rep.local_ic);
            }
        }
    }
    rep.local_matches_global = rep.local_ic.empty() == rep.ic_clean();

    // IR with the three-way split on lambda; weak inequalities.
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double cap = g.potential[k];
        if (cap <= 0.0) continue;
        const double u = pr.utility(k, k);
        const double frac = lambda[k] / cap;
        if (frac <= 1e-9) {
            if (u > tol) rep.ir.push_back({"ir_excluded", k, kNoType, u, 0.0, u});
        } else if (frac >= 1.0 - 1e-9) {
            if (u < -tol) rep.ir.push_back({"ir_full", k, kNoType, 0.0, u, -u});
        } else if (std::abs(u) > tol) {
            rep.ir.push_back({"ir_partial", k, kNoType, u, 0.0, std::abs(u)});
        }
    }

    // Wait chain per (j, l).
    for (std::size_t l = 0; l < B; ++l) {
        for (std::size_t j = 0; j < E; ++j) {
            for (std::size_t i = 0; i + 1 < V; ++i) {
                const double hi = menu.wait[at(i + 1, j, l)], lo = menu.wait[at(i, j, l)];
                if (hi > lo + tol) rep.wait_monotonicity.push_back({"wait_chain", at(i + 1, j, l), at(i, j, l), hi, lo, hi - lo});
            }
        }
    }

    if (opt.border) {
        auto frac = [&](std::size_t k) { return lambda[k] / g.potential[k]; };
        auto partial = [&](std::size_t k) { return frac(k) > 1e-7 && frac(k) < 1.0 - 1e-7; };
        // (j, l) columns: admission non-decreasing in VoT, one partial at most.
        for (std::size_t l = 0; l < B; ++l) {
            for (std::size_t j = 0; j < E; ++j) {
                std::size_t prev = kNoType, partials = 0, last_partial = kNoType;
                for (std::size_t i = 0; i < V; ++i) {
                    const std::size_t k = at(i, j, l);
                    if (g.potential[k] <= 0.0) continue;
                    if (prev != kNoType && frac(k) < frac(prev) - tol)
                        rep.border_structure.push_back({"border_vot_order", k, prev, frac(k), frac(prev), frac(prev) - frac(k)});
                    if (partial(k)) {
                        if (++partials > 1) rep.border_structure.push_back({"border_vot_partial", k, last_partial, frac(k), 0.0, frac(k)});
                        last_partial = k;
                    }
                    prev = k;
                }
            }
            // (i, l) rows: admission non-increasing in energy, one partial at most.
            for (std::size_t i = 0; i < V; ++i) {
                std::size_t prev = kNoType, partials = 0, last_partial = kNoType;
                for (std::size_t j = 0; j < E; ++j) {
                    const std::size_t k = at(i, j, l);
                    if (g.potential[k] <= 0.0) continue;
                    if (prev != kNoType && frac(k) > frac(prev) + tol)
                        rep.border_structure.push_back({"border_energy_order", k, prev, frac(k), frac(prev), frac(k) - frac(prev)});
                    if (partial(k)) {
                        if (++partials > 1) rep.border_structure.push_back({"border_energy_partial", k, last_partial, frac(k), 0.0, frac(k)});
                        last_partial = k;
                    }
                    prev = k;
                }
            }
        }
    }
    return rep;
}

std::optional<std::size_t> best_response(TypeIndex type, const Menu& menu, const Scenario& s, double tie_tol) {
    const TypeGrid& g = s.types;
    const Pricing pr{menu, g};
    const std::size_t me = g.flat(type);
    std::size_t best = me;
    double best_u = pr.utility(me, me);
    std::vector<std::size_t> prefs = s.subset_preferences(type.l);
    prefs.push_back(type.l);
    std::vector<std::size_t> options;
    for (std::size_t t : prefs) {
        for (std::size_t m = 0; m < g.num_vot(); ++m) {
            for (std::size_t k = type.j; k < g.num_energy(); ++k) options.push_back(g.flat({m, k, t}));
        }
    }
    std::sort(options.begin(), options.end());
    for (std::size_t o : options) {
        const double u = pr.utility(me, o);
        if (u > best_u + tie_tol) {
            best_u = u;
            best = o;
        }
    }
    if (best_u < -tie_tol) return std::nullopt;
    return best;
}

namespace {

bool single_preference_capacity_only(const Scenario& s) {
    return s.types.num_pref() == 1 && !(s.network && !s.network->line_limits.empty());
}

double mass(const Policy& p, std::size_t k, std::size_t q) { return p.lambda[k] * p.routing[k][q]; }

}  // namespace

std::optional<std::vector<AuditEntry>> check_priority_order(const Policy& policy, const Scenario& s, double tol) {
    if (!single_preference_capacity_only(s)) return std::nullopt;
    const TypeGrid& g = s.types;
    std::vector<AuditEntry> out;
    const auto& G = s.preferences[0].stations;
    // `hi` outranks `lo`: same energy and higher VoT, or same VoT and lower energy.
    auto scan = [&](std::size_t hi, std::size_t lo, const char* name) {
        for (std::size_t qk : G) {
            if (mass(policy, hi, qk) <= tol) continue;
            for (std::size_t qm : G) {
                if (s.stations[qm].detour_h < s.stations[qk].detour_h - 1e-12 && mass(policy, lo, qm) > tol)
                    out.push_back({name, lo, qm, mass(policy, lo, qm), 0.0, mass(policy, lo, qm)});
            }
        }
    };
    for (std::size_t i = 0; i < g.num_vot(); ++i) {
        for (std::size_t j = 0; j < g.num_energy(); ++j) {
            const std::size_t me = g.flat({i, j, 0});
            for (std::size_t n = 0; n < i; ++n) scan(me, g.flat({n, j, 0}), "lemma4_vot");
            for (std::size_t n = j + 1; n < g.num_energy(); ++n) scan(me, g.flat({i, n, 0}), "lemma4_energy");
        }
    }
    return out;
}

std::optional<std::vector<AuditEntry>> check_fill_order(const Policy& policy, const Scenario& s, double tol) {
    if (!single_preference_capacity_only(s)) return std::nullopt;
    const StationOrder ord = station_order(s);
    for (std::size_t a = 0; a + 1 < ord.order.size(); ++a) {
        if (s.stations[ord.order[a]].detour_h > s.stations[ord.order[a + 1]].detour_h) return std::nullopt;
    }
    const TypeGrid& g = s.types;
    const auto load = station_loads(policy, s);
    std::vector<AuditEntry> out;
    for (std::size_t a = 0; a < ord.order.size(); ++a) {
        const std::size_t n = ord.order[a];
        const Station& sn = s.stations[n];
        if (load[n] >= sn.capacity_kwh - 1e-6) continue;
        for (std::size_t b = a + 1; b < ord.order.size(); ++b) {
            const std::size_t m = ord.order[b];
            const Station& sm = s.stations[m];
            // only mass that strictly prefers the slack station counts
            for (std::size_t k = 0; k < g.size(); ++k) {
                const TypeIndex t = g.unflat(k);
                const double gain = g.vot[t.i] * (sm.detour_h - sn.detour_h) + g.energy[t.j] * (sm.lmp - sn.lmp);
                if (gain > tol && mass(policy, k, m) > tol)
                    out.push_back({"fill_order", k, m, mass(policy, k, m), 0.0, mass(policy, k, m)});
            }
        }
    }
    return out;
}

namespace {

struct OracleCell {
    std::size_t type;
    std::size_t station;
    double surplus;  // per vehicle
    double energy;
};

double binomial(double n, double k) {
    double r = 1.0;
    for (int i = 1; i <= static_cast<int>(k); ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

OracleResult brute_force_social(const Scenario& s, int grid) {
    const TypeGrid& g = s.types;
    const std::size_t cells = (s.num_stations() + 1) * g.size();
    if (cells > 12) throw std::invalid_argument("brute_force_social: instance has more than 12 decision cells");
    if (grid < 1) throw std::invalid_argument("brute_force_social: grid must be positive");

    std::vector<std::size_t> types;
    std::vector<std::vector<OracleCell>> per_type;
    OracleResult res;
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g.potential[k] <= 0.0) continue;
        const TypeIndex t = g.unflat(k);
        std::vector<OracleCell> row;
        for (std::size_t q : s.preferences[t.l].stations) {
            const Station& st = s.stations[q];
            const double sur = g.reward_of(t) - g.vot[t.i] * (st.detour_h + st.queue_h) - g.energy[t.j] * st.lmp;
            row.push_back({k, q, sur, g.energy[t.j]});
            res.lipschitz += g.potential[k] * std::max(0.0, sur);
        }
        types.push_back(k);
        per_type.push_back(std::move(row));
    }
    res.resolution_bound = res.lipschitz / grid;

    double lattice = 1.0;
    for (const auto& row : per_type) lattice *= binomial(grid + static_cast<double>(row.size()), static_cast<double>(row.size()));

    const std::size_t S = s.num_stations();
    if (lattice <= 2e7) {
        res.method = "grid";
        std::vector<double> load(S, 0.0);
        double best = 0.0;
        std::function<void(std::size_t, double)> over_types = [&](std::size_t a, double value) {
            if (a == per_type.size()) {
                best = std::max(best, value);
                return;
            }
            const auto& row = per_type[a];
            const double lam = g.potential[types[a]];
            std::function<void(std::size_t, int, double)> over_cells = [&](std::size_t c, int left, double v) {
                if (c == row.size()) {
                    over_types(a + 1, v);
                    return;
                }
                const OracleCell& cell = row[c];
                for (int n = 0; n <= left; ++n) {
                    const double m = lam * n / grid;
                    const double add = m * cell.energy;
                    if (load[cell.station] + add > s.stations[cell.station].capacity_kwh * (1 + 1e-12) + 1e-9) break;
                    load[cell.station] += add;
                    over_cells(c + 1, left - n, v + m * cell.surplus);
                    load[cell.station] -= add;
                }
            };
            over_cells(0, grid, value);
        };
        over_types(0, 0.0);
        res.welfare = best;
        return res;
    }

    // Vertices of {m >= 0, sum_q m_{k,q} <= Lambda_k, sum e m <= C_q}.
    res.method = "vertex";
    std::vector<OracleCell> flat;
    for (const auto& row : per_type) flat.insert(flat.end(), row.begin(), row.end());
    const std::size_t n = flat.size();
    struct Half {
        std::vector<double> a;
        double b;
    };
    std::vector<Half> hs;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<double> a(n, 0.0);
        a[c] = -1.0;
        hs.push_back({a, 0.0});
    }
    for (std::size_t t = 0; t < types.size(); ++t) {
        std::vector<double> a(n, 0.0);
        for (std::size_t c = 0; c < n; ++c) a[c] = flat[c].type == types[t] ? 1.0 : 0.0;
        hs.push_back({a, g.potential[types[t]]});
    }
    for (std::size_t q = 0; q < S; ++q) {
        if (!std::isfinite(s.stations[q].capacity_kwh)) continue;
        std::vector<double> a(n, 0.0);
        bool any = false;
        for (std::size_t c = 0; c < n; ++c) {
            if (flat[c].station == q) {
                a[c] = flat[c].energy;
                any = true;
            }
        }
        if (any) hs.push_back({a, s.stations[q].capacity_kwh});
    }
    double best = 0.0;
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    const std::size_t total = hs.size();
    while (true) {
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd b(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) A(r, c) = hs[idx[r]].a[c];
            b(r) = hs[idx[r]].b;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.rank() == static_cast<Eigen::Index>(n)) {
            const Eigen::VectorXd x = lu.solve(b);
            bool ok = true;
            for (const Half& h : hs) {
                double ax = 0.0;
                for (std::size_t c = 0; c < n; ++c) ax += h.a[c] * x(c);
                if (ax > h.b + 1e-9 * std::max(1.0, std::abs(h.b))) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                double v = 0.0;
                for (std::size_t c = 0; c < n; ++c) v += x(c) * flat[c].surplus;
                best = std::max(best, v);
            }
        }
        std::size_t pos = n;
        while (pos-- > 0) {
            if (idx[pos] < total - n + pos) break;
        }
        if (pos == static_cast<std::size_t>(-1)) break;
        ++idx[pos];
        for (std::size_t q = pos + 1; q < n; ++q) idx[q] = idx[q - 1] + 1;
    }
    res.welfare = best;
    return res;
}

}  // namespace evmenu
