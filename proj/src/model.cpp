#include "evmenu/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace evmenu {

bool TravelPreference::contains(std::size_t q) const {
    return std::binary_search(stations.begin(), stations.end(), q);
}

std::vector<int> TravelPreference::access_vector(std::size_t num_stations) const {
    std::vector<int> y(num_stations, 0);
    for (std::size_t q : stations) {
        if (q < num_stations) y[q] = 1;
    }
    return y;
}

std::size_t Scenario::outside_option() const {
    for (std::size_t q = stations.size(); q-- > 0;) {
        if (!stations[q].is_virtual) return q;
    }
    throw std::invalid_argument("scenario has no physical station");
}

std::size_t Scenario::physical_station(std::size_t q) const {
    const Station& s = stations.at(q);
    return (s.is_virtual && s.host) ? *s.host : q;
}

namespace {

bool strict_subset(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::vector<std::size_t> Scenario::subset_preferences(std::size_t l) const {
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < preferences.size(); ++t) {
        if (t != l && strict_subset(preferences[t].stations, preferences[l].stations)) out.push_back(t);
    }
    return out;
}

std::vector<std::size_t> Scenario::next_smaller_preferences(std::size_t l) const {
    std::vector<std::size_t> out;
    for (std::size_t t : subset_preferences(l)) {
        if (preferences[t].stations.size() + 1 == preferences[l].stations.size()) out.push_back(t);
    }
    return out;
}

std::vector<std::size_t> Scenario::covered_preferences(std::size_t l) const {
    const auto below = subset_preferences(l);
    std::vector<std::size_t> out;
    for (std::size_t t : below) {
        bool covered = true;
        for (std::size_t s : below) {
            if (s != t && strict_subset(preferences[t].stations, preferences[s].stations)) {
                covered = false;
                break;
            }
        }
        if (covered) out.push_back(t);
    }
    return out;
}

Scenario Scenario::slot(std::size_t t) const {
    const TimelineSlot& ts = timeline.at(t);
    Scenario out = *this;
    out.timeline.clear();
    if (!ts.potential.empty()) out.types.potential = ts.potential;
    if (!ts.line_limits.empty() && out.network) out.network->line_limits = ts.line_limits;
    return out;
}

bool ValidationReport::has_errors() const {
    return std::any_of(issues.begin(), issues.end(),
                       [](const ValidationIssue& v) { return v.severity == Severity::Error; });
}

std::size_t ValidationReport::count(const std::string& code) const {
    return static_cast<std::size_t>(std::count_if(
        issues.begin(), issues.end(), [&](const ValidationIssue& v) { return v.code == code; }));
}

namespace {

class Reporter {
public:
    explicit Reporter(ValidationReport& r) : report_(r) {}

    template <class... Args>
    void error(const std::string& code, const Args&... parts) {
        add(Severity::Error, code, parts...);
    }
    template <class... Args>
    void warning(const std::string& code, const Args&... parts) {
        add(Severity::Warning, code, parts...);
    }

private:
    template <class... Args>
    void add(Severity s, const std::string& code, const Args&... parts) {
        std::ostringstream os;
        (os << ... << parts);
        report_.issues.push_back({s, code, os.str()});
    }
    ValidationReport& report_;
};

bool finite(double x) { return std::isfinite(x); }

void validate_types(const TypeGrid& g, Reporter& rep) {
    const std::size_t V = g.num_vot(), E = g.num_energy(), B = g.num_pref();
    if (V == 0 || E == 0 || B == 0) {
        rep.error("empty_grid", "type grid needs at least one VoT, energy and preference");
        return;
    }
    for (std::size_t i = 1; i < V; ++i) {
        if (!(g.vot[i] > g.vot[i - 1])) rep.error("vot_order", "v must be strictly ascending at i=", i + 1);
    }
    for (std::size_t j = 1; j < E; ++j) {
        if (!(g.energy[j] > g.energy[j - 1]))
            rep.error("energy_order", "e must be strictly ascending at j=", j + 1);
    }
    for (double v : g.vot) {
        if (!finite(v) || v <= 0) rep.error("vot_value", "v must be positive and finite");
    }
    for (double e : g.energy) {
        if (!finite(e) || e <= 0) rep.error("energy_value", "e must be positive and finite");
    }
    for (std::size_t l = 0; l < B; ++l) {
        if (g.reward[l].size() != V) {
            rep.error("dimension", "R[", l + 1, "] has ", g.reward[l].size(), " entries, expected ", V);
            continue;
        }
        for (std::size_t i = 0; i < V; ++i) {
            const double r = g.reward[l][i];
            if (!finite(r) || r < 0) rep.error("reward_value", "R[", l + 1, "][", i + 1, "] is negative");
            else if (r == 0) rep.warning("reward_zero", "R[", l + 1, "][", i + 1, "] is zero");
        }
    }
    if (g.potential.size() != g.size()) {
        rep.error("dimension", "Lambda has ", g.potential.size(), " entries, expected ", g.size());
    } else {
        for (double x : g.potential) {
            if (!finite(x) || x < 0) {
                rep.error("potential_value", "Lambda entries must be finite and >= 0");
                break;
            }
        }
    }
}

void validate_assumptions(const Scenario& s, Reporter& rep) {
    const TypeGrid& g = s.types;
    const std::size_t V = g.num_vot(), B = g.num_pref();
    if (s.preferences.size() != B) return;
    for (std::size_t l = 0; l < B; ++l) {
        if (g.reward[l].size() != V) return;
    }
    // Assumption 1: smaller access sets earn strictly higher rewards; equal sizes, equal rewards.
    for (std::size_t i = 0; i < V; ++i) {
        for (std::size_t l = 0; l < B; ++l) {
            for (std::size_t m = 0; m < B; ++m) {
                const std::size_t gl = s.preferences[l].stations.size();
                const std::size_t gm = s.preferences[m].stations.size();
                const double rl = g.reward[l][i], rm = g.reward[m][i];
                if (gl > gm && !(rl < rm)) {
                    rep.warning("assumption1", "|G_", l + 1, "| > |G_", m + 1, "| but R_", i + 1, "^", l + 1,
                                " = ", rl, " >= R_", i + 1, "^", m + 1, " = ", rm);
                } else if (gl == gm && l < m && rl != rm) {
                    rep.warning("assumption1", "|G_", l + 1, "| = |G_", m + 1, "| but R_", i + 1, " differs");
                }
            }
        }
    }
    // Assumption 2: R_i / v_i strictly increasing in i.
    for (std::size_t l = 0; l < B; ++l) {
        for (std::size_t i = 1; i < V; ++i) {
            const double prev = g.reward[l][i - 1] / g.vot[i - 1];
            const double cur = g.reward[l][i] / g.vot[i];
            if (!(cur > prev)) {
                rep.warning("assumption2", "R/v not increasing at preference ", l + 1, ", i=", i + 1, ": ", prev,
                            " -> ", cur);
            }
        }
    }
}

void validate_stations(const Scenario& s, Reporter& rep) {
    if (s.stations.empty()) {
        rep.error("no_stations", "scenario has no stations");
        return;
    }
    bool any_physical = false;
    for (std::size_t q = 0; q < s.stations.size(); ++q) {
        const Station& st = s.stations[q];
        any_physical = any_physical || !st.is_virtual;
        if (!(st.detour_h >= 0) || !finite(st.detour_h)) rep.error("station_detour", "d_", q + 1, " must be >= 0");
        if (!(st.capacity_kwh >= 0)) rep.error("station_capacity", "C_", q + 1, " must be >= 0");
        if (!(st.lmp >= 0) || !finite(st.lmp)) rep.error("station_lmp", "theta_", q + 1, " must be >= 0");
        if (!(st.queue_h >= 0)) rep.error("station_queue", "rho_", q + 1, " must be >= 0");
        if (st.queue_h != 0) rep.warning("queue_time", "rho_", q + 1, " != 0: hard-capacity planners need rho = 0");
        if (st.is_virtual && st.host && *st.host >= s.stations.size())
            rep.error("station_host", "virtual station ", q + 1, " has an unknown host");
    }
    if (!any_physical) {
        rep.error("no_stations", "scenario has no physical station");
        return;
    }
    const std::size_t Q = s.outside_option();
    for (std::size_t q = 0; q < Q; ++q) {
        if (!s.stations[q].is_virtual && s.stations[Q].lmp > s.stations[q].lmp)
            rep.warning("outside_lmp", "theta_Q = ", s.stations[Q].lmp, " exceeds theta_", q + 1);
    }
}

void validate_preferences(const Scenario& s, Reporter& rep) {
    if (s.preferences.size() != s.types.num_pref()) {
        rep.error("dimension", "preferences has ", s.preferences.size(), " entries, R has ", s.types.num_pref());
        return;
    }
    if (s.stations.empty()) return;
    const bool has_physical = std::any_of(s.stations.begin(), s.stations.end(),
                                          [](const Station& st) { return !st.is_virtual; });
    for (std::size_t l = 0; l < s.preferences.size(); ++l) {
        const auto& g = s.preferences[l].stations;
        if (g.empty()) {
            rep.error("preference_empty", "G_", l + 1, " is empty");
            continue;
        }
        if (!std::is_sorted(g.begin(), g.end()) || std::adjacent_find(g.begin(), g.end()) != g.end())
            rep.error("preference_order", "G_", l + 1, " must be sorted without duplicates");
        for (std::size_t q : g) {
            if (q >= s.stations.size()) rep.error("preference_station", "G_", l + 1, " references station ", q + 1);
        }
        if (has_physical && !s.preferences[l].contains(s.outside_option()))
            rep.error("missing_outside_option", "G_", l + 1, " does not contain the outside station");
    }
}

void validate_network(const Scenario& s, Reporter& rep) {
    if (!s.network) return;
    const DistributionNetwork& n = s.network.value();
    std::size_t physical = 0;
    for (const Station& st : s.stations) physical += st.is_virtual ? 0 : 1;
    for (const auto& row : n.ptdf) {
        if (row.size() != n.num_buses()) {
            rep.error("network_dimension", "D columns must equal the number of buses in E");
            break;
        }
    }
    for (const auto& row : n.station_bus) {
        if (row.size() < physical) {
            rep.error("network_dimension", "E must have one column per physical station");
            break;
        }
    }
    if (n.line_limits.size() != n.num_lines()) rep.error("network_dimension", "f must have one entry per line");
    for (double f : n.line_limits) {
        if (!(f >= 0)) {
            rep.error("network_limit", "line limits must be >= 0");
            break;
        }
    }
}

void validate_timeline(const Scenario& s, Reporter& rep) {
    for (std::size_t t = 0; t < s.timeline.size(); ++t) {
        const TimelineSlot& ts = s.timeline[t];
        if (!ts.potential.empty() && ts.potential.size() != s.types.size())
            rep.error("timeline_dimension", "slot ", t + 1, " Lambda shape differs from the type grid");
        for (double x : ts.potential) {
            if (!(x >= 0)) {
                rep.error("potential_value", "slot ", t + 1, " has a negative Lambda");
                break;
            }
        }
        if (!ts.solar_kwh.empty() && ts.solar_kwh.size() != s.stations.size())
            rep.error("timeline_dimension", "slot ", t + 1, " solar vector must have one entry per station");
        for (double x : ts.solar_kwh) {
            if (!(x >= 0)) {
                rep.error("solar_value", "slot ", t + 1, " has negative solar");
                break;
            }
        }
        if (!ts.line_limits.empty()) {
            if (!s.network || ts.line_limits.size() != s.network->num_lines())
                rep.error("timeline_dimension", "slot ", t + 1, " f must have one entry per line");
        }
    }
}

}  // namespace

ValidationReport validate_scenario(const Scenario& scenario) {
    ValidationReport report;
    Reporter rep(report);
    validate_types(scenario.types, rep);
    validate_stations(scenario, rep);
    validate_preferences(scenario, rep);
    validate_network(scenario, rep);
    validate_timeline(scenario, rep);
    if (!report.has_errors()) validate_assumptions(scenario, rep);
    return report;
}

double expected_wait(const std::vector<double>& routing, const std::vector<Station>& stations) {
    if (routing.size() != stations.size())
        throw std::invalid_argument("expected_wait: routing has " + std::to_string(routing.size()) +
                                    " entries for " + std::to_string(stations.size()) + " stations");
    double w = 0.0;
    for (std::size_t q = 0; q < routing.size(); ++q) w += (stations[q].detour_h + stations[q].queue_h) * routing[q];
    return w;
}

double type_utility(double reward, double vot, double wait, double price) { return reward - vot * wait - price; }

std::vector<std::string> check_policy(const Policy& policy, const Scenario& scenario, double load_tol) {
    std::vector<std::string> out;
    const TypeGrid& g = scenario.types;
    const std::size_t Q = scenario.num_stations();
    if (policy.lambda.size() != g.size() || policy.routing.size() != g.size()) {
        out.push_back("policy shape does not match the type grid");
        return out;
    }
    std::vector<double> load(Q, 0.0);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const TypeIndex t = g.unflat(k);
        const double lam = policy.lambda[k];
        if (lam < -1e-12 || lam > g.potential[k] * (1 + 1e-12) + 1e-12) {
            std::ostringstream os;
            os << "lambda out of [0, Lambda] for type " << k;
            out.push_back(os.str());
        }
        if (lam <= 0) continue;
        const auto& r = policy.routing[k];
        if (r.size() != Q) {
            out.push_back("routing row has wrong length");
            continue;
        }
        double sum = 0.0;
        for (std::size_t q = 0; q < Q; ++q) {
            if (r[q] < -1e-12) out.push_back("negative routing probability");
            if (r[q] > 1e-12 && !scenario.preferences[t.l].contains(q)) out.push_back("routing outside G_l");
            sum += r[q];
            load[q] += lam * g.energy[t.j] * r[q];
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "routing of type " << k << " sums to " << sum;
            out.push_back(os.str());
        }
    }
    for (std::size_t q = 0; q < Q; ++q) {
        if (load[q] > scenario.stations[q].capacity_kwh + load_tol) {
            std::ostringstream os;
            os << "station " << q + 1 << " load " << load[q] << " exceeds capacity " << scenario.stations[q].capacity_kwh;
            out.push_back(os.str());
        }
    }
    return out;
}

}  // namespace evmenu
