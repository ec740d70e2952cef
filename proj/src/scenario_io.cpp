#include "evmenu/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace evmenu {
namespace {

[[noreturn]] void fail(const std::string& what) { throw ScenarioFormatError(what); }

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where + ": missing field '" + key + "'");
    return obj.at(key);
}

double number(const json& v, const std::string& where) {
    if (v.is_null()) return kInf;
    if (v.is_string() && (v == "inf" || v == "Infinity")) return kInf;
    if (!v.is_number()) fail(where + ": expected a number");
    return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where + ": expected an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

std::vector<std::vector<double>> matrix(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where + ": expected an array of arrays");
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(numbers(v[k], where + "[" + std::to_string(k) + "]"));
    return out;
}

// Lambda[l][i][j] flattened in (l, i, j) order.
std::vector<double> potential(const json& v, std::size_t B, std::size_t V, std::size_t E, const std::string& where) {
    if (!v.is_array() || v.size() != B) fail(where + ": expected " + std::to_string(B) + " preference blocks");
    std::vector<double> out;
    out.reserve(B * V * E);
    for (std::size_t l = 0; l < B; ++l) {
        const auto block = matrix(v[l], where + "[" + std::to_string(l) + "]");
        if (block.size() != V) fail(where + ": each block needs " + std::to_string(V) + " VoT rows");
        for (const auto& row : block) {
            if (row.size() != E) fail(where + ": each row needs " + std::to_string(E) + " energy entries");
            out.insert(out.end(), row.begin(), row.end());
        }
    }
    return out;
}

json potential_to_json(const std::vector<double>& flat, std::size_t B, std::size_t V, std::size_t E) {
    json out = json::array();
    for (std::size_t l = 0; l < B; ++l) {
        json block = json::array();
        for (std::size_t i = 0; i < V; ++i) {
            json row = json::array();
            for (std::size_t j = 0; j < E; ++j) row.push_back(flat[(l * V + i) * E + j]);
            block.push_back(row);
        }
        out.push_back(block);
    }
    return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

Scenario scenario_from_json(const json& doc) {
    Scenario s;
    const json& types = require(doc, "types", "scenario");
    s.types.vot = numbers(require(types, "v", "types"), "types.v");
    s.types.energy = numbers(require(types, "e", "types"), "types.e");
    s.types.reward = matrix(require(types, "R", "types"), "types.R");
    const std::size_t V = s.types.vot.size(), E = s.types.energy.size(), B = s.types.reward.size();
    s.types.potential = potential(require(types, "Lambda", "types"), B, V, E, "types.Lambda");

    const json& prefs = require(doc, "preferences", "scenario");
    if (!prefs.is_array()) fail("preferences: expected an array of station lists");
    for (const json& p : prefs) {
        TravelPreference tp;
        if (!p.is_array()) fail("preferences: expected an array of station lists");
        for (const json& q : p) {
            if (!q.is_number_integer() || q.get<long long>() < 1) fail("preferences: station indices are 1-based integers");
            tp.stations.push_back(static_cast<std::size_t>(q.get<long long>() - 1));
        }
        std::sort(tp.stations.begin(), tp.stations.end());
        s.preferences.push_back(std::move(tp));
    }

    const json& st = require(doc, "stations", "scenario");
    const auto d = numbers(require(st, "d", "stations"), "stations.d");
    const auto theta = numbers(require(st, "theta", "stations"), "stations.theta");
    const auto cap = numbers(require(st, "C", "stations"), "stations.C");
    std::vector<double> rho(d.size(), 0.0);
    if (st.contains("rho")) rho = numbers(st.at("rho"), "stations.rho");
    if (theta.size() != d.size() || cap.size() != d.size() || rho.size() != d.size())
        fail("stations: d, theta, C and rho must have equal lengths");
    for (std::size_t q = 0; q < d.size(); ++q) {
        Station station;
        station.detour_h = d[q];
        station.lmp = theta[q];
        station.capacity_kwh = cap[q];
        station.queue_h = rho[q];
        s.stations.push_back(station);
    }

    if (doc.contains("network") && !doc.at("network").is_null()) {
        const json& n = doc.at("network");
        DistributionNetwork net;
        net.ptdf = matrix(require(n, "D", "network"), "network.D");
        net.station_bus = matrix(require(n, "E", "network"), "network.E");
        net.line_limits = numbers(require(n, "f", "network"), "network.f");
        s.network = std::move(net);
    }

    if (doc.contains("timeline") && !doc.at("timeline").is_null()) {
        const json& tl = doc.at("timeline");
        if (!tl.is_array()) fail("timeline: expected an array of slots");
        for (std::size_t t = 0; t < tl.size(); ++t) {
            const std::string where = "timeline[" + std::to_string(t) + "]";
            TimelineSlot slot;
            if (tl[t].contains("Lambda")) slot.potential = potential(tl[t].at("Lambda"), B, V, E, where + ".Lambda");
            if (tl[t].contains("solar")) slot.solar_kwh = numbers(tl[t].at("solar"), where + ".solar");
            if (tl[t].contains("f")) slot.line_limits = numbers(tl[t].at("f"), where + ".f");
            s.timeline.push_back(std::move(slot));
        }
    }
    return s;
}

json scenario_to_json(const Scenario& s) {
    const std::size_t V = s.types.num_vot(), E = s.types.num_energy(), B = s.types.num_pref();
    json doc;
    doc["types"] = {{"v", s.types.vot},
                    {"e", s.types.energy},
                    {"R", s.types.reward},
                    {"Lambda", potential_to_json(s.types.potential, B, V, E)}};
    json prefs = json::array();
    for (const auto& p : s.preferences) {
        json list = json::array();
        for (std::size_t q : p.stations) list.push_back(q + 1);
        prefs.push_back(list);
    }
    doc["preferences"] = prefs;
    json d = json::array(), theta = json::array(), cap = json::array(), rho = json::array();
    for (const Station& st : s.stations) {
        d.push_back(st.detour_h);
        theta.push_back(st.lmp);
        cap.push_back(finite_or_null(st.capacity_kwh));
        rho.push_back(st.queue_h);
    }
    doc["stations"] = {{"d", d}, {"theta", theta}, {"C", cap}, {"rho", rho}};
    if (s.network) {
        json f = json::array();
        for (double x : s.network->line_limits) f.push_back(finite_or_null(x));
        doc["network"] = {{"D", s.network->ptdf}, {"E", s.network->station_bus}, {"f", f}};
    }
    if (!s.timeline.empty()) {
        json tl = json::array();
        for (const TimelineSlot& ts : s.timeline) {
            json slot = json::object();
            if (!ts.potential.empty()) slot["Lambda"] = potential_to_json(ts.potential, B, V, E);
            if (!ts.solar_kwh.empty()) slot["solar"] = ts.solar_kwh;
            if (!ts.line_limits.empty()) slot["f"] = ts.line_limits;
            tl.push_back(slot);
        }
        doc["timeline"] = tl;
    }
    return doc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioFormatError("cannot open scenario file " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ScenarioFormatError(path.string() + ": malformed JSON: " + e.what());
    } catch (const json::type_error& e) {
        throw ScenarioFormatError(path.string() + ": " + e.what());
    }
    try {
        return scenario_from_json(doc);
    } catch (const json::exception& e) {
        throw ScenarioFormatError(path.string() + ": " + e.what());
    }
}

}  // namespace evmenu
