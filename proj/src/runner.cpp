#include "evmenu/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "evmenu/audit.hpp"
#include "evmenu/equilibrium.hpp"
#include "evmenu/profit.hpp"
#include "evmenu/scenario_io.hpp"
#include "evmenu/welfare.hpp"

namespace evmenu {

std::string format_number(double x) {
    if (x == 0.0) return "0";  // avoids "-0"
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round_to_output(double x) { return std::strtod(format_number(x).c_str(), nullptr); }

namespace {

using nlohmann::json;

struct SlotResult {
    std::size_t slot = 0;
    Scenario scenario;
    bool ok = false;
    std::string status;
    Policy policy;
    Menu menu;
    double welfare = 0.0, profit = 0.0, travel = 0.0, admitted = 0.0;
    std::vector<double> line_load, line_limit;
    json audit = json::array();
    json equilibria;
};

void round_policy(Policy& p) {
    for (double& x : p.lambda) x = round_to_output(x);
    for (double& x : p.wait) x = round_to_output(x);
    for (double& x : p.price) x = round_to_output(x);
    for (auto& row : p.routing) {
        for (double& x : row) x = round_to_output(x);
    }
}

SlotResult solve_slot(const Scenario& base, std::size_t t, const RunConfig& cfg) {
    SlotResult r;
    r.slot = t;
    Scenario s = base.timeline.empty() ? base : base.slot(t);
    if (cfg.solar && !base.timeline.empty() && !base.timeline[t].solar_kwh.empty())
        s = solarize(s, base.timeline[t].solar_kwh);
    r.scenario = s;
    const TypeGrid& g = s.types;

    if (cfg.mode == Mode::Welfare) {
        SocialOptions opt;
        opt.network = cfg.network;
        SocialResult res = solve_social(s, opt);
        r.status = lp::to_string(res.lp.status);
        if (!res.ok()) return r;
        r.policy = std::move(res.policy);
    } else {
        ProfitOptions opt;
        opt.network = cfg.network;
        opt.rent = cfg.energy_rent ? RentIndex::Energy : RentIndex::Verbatim;
        opt.deferral = cfg.always_defer ? Deferral::Always : Deferral::WhenInfeasible;
        ProfitResult res = solve_profit(s, opt);
        r.status = lp::to_string(res.lp.status);
        if (!res.ok()) return r;
        r.policy = std::move(res.policy);
        r.menu = {res.menu.price, res.menu.wait};
    }
    r.ok = true;
    round_policy(r.policy);
    if (cfg.mode == Mode::Welfare) r.menu = {r.policy.price, r.policy.wait};

    r.welfare = evaluate_welfare(r.policy, s);
    r.profit = evaluate_profit(r.policy, ProfitMenu{r.policy.price, r.policy.wait, 0.0}, s);
    for (std::size_t k = 0; k < g.size(); ++k) {
        r.travel += g.vot[g.unflat(k).i] * r.policy.lambda[k] * r.policy.wait[k];
        r.admitted += r.policy.lambda[k];
    }

    if (s.network) {
        const auto sens = line_sensitivity(s);
        const auto load = station_loads(r.policy, s);
        for (std::size_t l = 0; l < sens.size(); ++l) {
            double flow = 0.0;
            for (std::size_t q = 0; q < s.num_stations(); ++q) flow += sens[l][q] * load[q];
            r.line_load.push_back(flow);
            r.line_limit.push_back(s.network->line_limits[l]);
        }
    }

    if (cfg.audit) {
        AuditOptions ao;
        ao.tol = cfg.tol;
        const AuditReport rep = audit(r.menu, r.policy.lambda, s, ao);
        r.audit = to_json(rep, g);
    }
    if (cfg.equilibrium) {
        try {
            const auto eqs = enumerate_equilibria(s);
            r.equilibria = {{"quantum", default_quantum(s)}, {"equilibria", to_json(eqs, s)}};
        } catch (const std::invalid_argument& e) {
            r.equilibria = {{"error", e.what()}};
        }
    }
    return r;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& log) {
    Scenario base;
    try {
        base = load_scenario(cfg.scenario);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 2;
    }
    const ValidationReport vr = validate_scenario(base);
    for (const ValidationIssue& issue : vr.issues) {
        log << (issue.severity == Severity::Error ? "error: " : "warning: ") << issue.code << ": " << issue.message
            << '\n';
    }
    if (vr.has_errors()) return 2;
    if (cfg.network && !base.network) {
        log << "error: --network requested but the scenario has no network\n";
        return 2;
    }

    const std::size_t slots = base.timeline.empty() ? 1 : base.timeline.size();
    std::vector<std::future<SlotResult>> jobs;
    for (std::size_t t = 0; t < slots; ++t) jobs.push_back(std::async(std::launch::async, solve_slot, std::cref(base), t, std::cref(cfg)));
    std::vector<SlotResult> results;
    try {
        for (auto& j : jobs) results.push_back(j.get());
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }

    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) {
        log << "error: cannot create output directory " << cfg.out.string() << '\n';
        return 2;
    }

    std::ofstream policy(cfg.out / "policy.csv");
    policy << "slot,i,j,ell,q,r,lambda,W,P\n";
    std::ofstream loading(cfg.out / "loading.csv");
    loading << "slot,line,load_kwh,limit_kwh\n";
    json summary;
    summary["mode"] = cfg.mode == Mode::Welfare ? "welfare" : "profit";
    summary["network"] = cfg.network;
    summary["solar"] = cfg.solar;
    summary["slots"] = json::array();
    json audit_out = json::array();
    json eq_out = json::array();
    double tw = 0.0, tp = 0.0, tt = 0.0;
    bool failed = false;
    std::size_t violations = 0;

    for (const SlotResult& r : results) {
        const std::size_t slot = r.slot + 1;
        if (!r.ok) {
            failed = true;
            log << "error: slot " << slot << " solver status " << r.status << '\n';
            summary["slots"].push_back({{"slot", slot}, {"status", r.status}});
            continue;
        }
        const TypeGrid& g = r.scenario.types;
        for (std::size_t l = 0; l < g.num_pref(); ++l) {
            for (std::size_t i = 0; i < g.num_vot(); ++i) {
                for (std::size_t j = 0; j < g.num_energy(); ++j) {
                    const std::size_t k = g.flat({i, j, l});
                    for (std::size_t q : r.scenario.preferences[l].stations) {
                        policy << slot << ',' << i + 1 << ',' << j + 1 << ',' << l + 1 << ',' << q + 1 << ','
                               << format_number(r.policy.routing[k][q]) << ',' << format_number(r.policy.lambda[k])
                               << ',' << format_number(r.policy.wait[k]) << ',' << format_number(r.policy.price[k])
                               << '\n';
                    }
                }
            }
        }
        for (std::size_t l = 0; l < r.line_load.size(); ++l) {
            loading << slot << ',' << l + 1 << ',' << format_number(r.line_load[l]) << ','
                    << format_number(r.line_limit[l]) << '\n';
        }
        summary["slots"].push_back({{"slot", slot},
                                    {"status", r.status},
                                    {"welfare", r.welfare},
                                    {"profit", r.profit},
                                    {"travel_cost", r.travel},
                                    {"admitted", r.admitted}});
        tw += r.welfare;
        tp += r.profit;
        tt += r.travel;
        for (json e : r.audit) {
            e["slot"] = slot;
            audit_out.push_back(e);
            ++violations;
        }
        if (cfg.equilibrium) {
            json e = r.equilibria;
            e["slot"] = slot;
            e["planner_welfare"] = r.welfare;
            eq_out.push_back(e);
        }
    }
    summary["totals"] = {{"welfare", tw}, {"profit", tp}, {"travel_cost", tt}};
    std::ofstream(cfg.out / "summary.json") << summary.dump(2) << '\n';
    if (cfg.audit) std::ofstream(cfg.out / "audit.json") << audit_out.dump(2) << '\n';
    if (cfg.equilibrium) std::ofstream(cfg.out / "equilibria.json") << eq_out.dump(2) << '\n';
    if (violations > 0) log << "warning: audit found " << violations << " violation(s), see audit.json\n";
    return failed ? 1 : 0;
}

}  // namespace evmenu
