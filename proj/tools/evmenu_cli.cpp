#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "evmenu/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Differentiated-service menu planner for EV charging networks"};
    evmenu::RunConfig cfg;
    std::string scenario, out = "out", rent = "verbatim";
    evmenu::Mode mode = evmenu::Mode::Welfare;
    const std::map<std::string, evmenu::Mode> modes{{"welfare", evmenu::Mode::Welfare}, {"profit", evmenu::Mode::Profit}};

    app.add_option("--scenario", scenario, "scenario JSON file")->required();
    app.add_option("--mode", mode, "welfare or profit")->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
    app.add_flag("--network", cfg.network, "enforce distribution line limits");
    app.add_flag("--solar", cfg.solar, "add per-slot solar as zero-price virtual stations");
    app.add_flag("--audit", cfg.audit, "audit every menu and write audit.json");
    app.add_flag("--equilibrium", cfg.equilibrium, "enumerate self-routing equilibria per slot");
    app.add_option("--out", out, "output directory");
    app.add_option("--tol", cfg.tol, "audit tolerance")->check(CLI::PositiveNumber);
    app.add_flag("--defer", cfg.always_defer, "profit: allow lowest-VoT deferral even when everyone fits");
    app.add_option("--rent", rent, "profit rent column: verbatim or energy")->check(CLI::IsMember({"verbatim", "energy"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    cfg.scenario = scenario;
    cfg.mode = mode;
    cfg.out = out;
    cfg.energy_rent = rent == "energy";
    return evmenu::run(cfg, std::cerr);
}
