// File formats: the versioned map file, risk/graph/reward configuration,
// path and motion-plan JSON, and the CSV trace emitted by the simulator.
// JSON objects are emitted with sorted keys so identical inputs produce
// byte-identical outputs.

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tuav/grid.hpp"
#include "tuav/planner.hpp"
#include "tuav/risk.hpp"
#include "tuav/servo.hpp"
#include "tuav/sim.hpp"
#include "tuav/tether.hpp"

namespace tuav {

using json = nlohmann::json;

inline constexpr int kMapFormatVersion = 1;

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace io_detail {

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

inline void reject_unknown_fields(const json& j, const std::vector<std::string>& known,
                                  const std::string& what) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw ParseError(what + ": unknown field '" + it.key() + "'");
    }
}

inline State state_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ParseError("cell must be a [i, j, k] triple");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

inline json state_to_json(const State& s) { return json::array({s.i, s.j, s.k}); }

inline Vec3 vec_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ParseError("point must be a [x, y, z] triple");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace io_detail

// --- map file ----------------------------------------------------------------

inline GridMap map_from_json(const json& j) {
    io_detail::reject_unknown_fields(
        j, {"version", "resolution_m", "dims", "occupied", "rewards", "start",
            "tether_origin_m", "poi"},
        "map file");
    for (const char* field : {"version", "resolution_m", "dims", "occupied", "start",
                              "tether_origin_m"})
        if (!j.contains(field)) throw ParseError(std::string("map file: missing '") + field + "'");
    if (j["version"].get<int>() != kMapFormatVersion)
        throw ParseError("map file: unsupported version " + j["version"].dump());
    auto dims = j["dims"];
    if (!dims.is_array() || dims.size() != 3) throw ParseError("map file: dims must be [nx, ny, nz]");

    GridMap map(dims[0].get<int>(), dims[1].get<int>(), dims[2].get<int>(),
                j["resolution_m"].get<double>());
    for (const auto& cell : j["occupied"]) {
        State s = io_detail::state_from_json(cell);
        if (!map.in_bounds(s)) throw ParseError("map file: occupied cell out of bounds");
        map.set_occupied(s);
    }
    map.set_start(io_detail::state_from_json(j["start"]));
    map.set_tether_origin(io_detail::vec_from_json(j["tether_origin_m"]));
    if (j.contains("rewards")) {
        for (const auto& entry : j["rewards"]) {
            io_detail::reject_unknown_fields(entry, {"cell", "value"}, "map file reward");
            State s = io_detail::state_from_json(entry.at("cell"));
            if (!map.in_bounds(s)) throw ParseError("map file: reward cell out of bounds");
            map.set_reward(s, entry.at("value").get<double>());
        }
    }
    if (j.contains("poi")) map.set_poi(io_detail::vec_from_json(j["poi"]));
    map.validate();
    return map;
}

inline json map_to_json(const GridMap& map) {
    json j;
    j["version"] = kMapFormatVersion;
    j["resolution_m"] = map.resolution();
    j["dims"] = json::array({map.nx(), map.ny(), map.nz()});
    json occ = json::array();
    for (const State& s : map.occupied_cells()) occ.push_back(io_detail::state_to_json(s));
    j["occupied"] = occ;
    json rewards = json::array();
    for (const auto& [key, value] : map.rewards()) {
        json entry;
        entry["cell"] = io_detail::state_to_json(map.state_from_key(key));
        entry["value"] = value;
        rewards.push_back(entry);
    }
    j["rewards"] = rewards;
    j["start"] = io_detail::state_to_json(map.start());
    j["tether_origin_m"] = io_detail::vec_to_json(map.tether_origin());
    if (map.has_poi()) j["poi"] = io_detail::vec_to_json(map.poi());
    return j;
}

inline GridMap load_map(const std::string& path) {
    GridMap map = map_from_json(io_detail::read_json_file(path));
    return map;
}

inline void save_map(const GridMap& map, const std::string& path) {
    io_detail::write_text_file(path, map_to_json(map).dump(2) + "\n");
}

// --- risk / graph / reward configuration -------------------------------------

inline RiskConfig risk_config_from_json(const json& root) {
    if (!root.contains("risk")) throw ParseError("config file: missing 'risk' section");
    const json& j = root["risk"];
    io_detail::reject_unknown_fields(
        j,
        {"elements", "distance_knots", "n_rays", "v_safe", "r_max_vis", "agent_cd",
         "p_granular", "p_restricted", "singularity_band_deg", "r_max_sing", "action_coeff",
         "turn_coeff", "tether_coeff", "contact_prob", "p_floor", "p_cap"},
        "risk config");
    RiskConfig cfg;
    if (j.contains("elements")) {
        for (const auto& name : j["elements"]) {
            std::string n = name.get<std::string>();
            bool found = false;
            for (int e = 0; e < kNumRiskElements; ++e)
                if (n == risk_element_name(static_cast<RiskElement>(e))) {
                    cfg.enabled[e] = true;
                    found = true;
                }
            if (!found) throw ParseError("risk config: unknown element '" + n + "'");
        }
    }
    if (j.contains("distance_knots")) {
        cfg.distance_map.knots.clear();
        for (const auto& knot : j["distance_knots"])
            cfg.distance_map.knots.emplace_back(knot.at(0).get<double>(),
                                                knot.at(1).get<double>());
    }
    if (j.contains("n_rays")) cfg.n_rays = j["n_rays"].get<int>();
    if (j.contains("v_safe")) cfg.v_safe = j["v_safe"].get<double>();
    if (j.contains("r_max_vis")) cfg.r_max_vis = j["r_max_vis"].get<double>();
    if (j.contains("agent_cd")) cfg.agent_cd = j["agent_cd"].get<double>();
    if (j.contains("p_granular")) cfg.p_granular = j["p_granular"].get<double>();
    if (j.contains("p_restricted")) cfg.p_restricted = j["p_restricted"].get<double>();
    if (j.contains("singularity_band_deg"))
        cfg.singularity_band = deg2rad(j["singularity_band_deg"].get<double>());
    if (j.contains("r_max_sing")) cfg.r_max_sing = j["r_max_sing"].get<double>();
    if (j.contains("action_coeff")) cfg.action_coeff = j["action_coeff"].get<double>();
    if (j.contains("turn_coeff")) cfg.turn_coeff = j["turn_coeff"].get<double>();
    if (j.contains("tether_coeff")) cfg.tether_coeff = j["tether_coeff"].get<double>();
    if (j.contains("contact_prob")) cfg.contact_prob = j["contact_prob"].get<double>();
    if (j.contains("p_floor")) cfg.p_floor = j["p_floor"].get<double>();
    if (j.contains("p_cap")) cfg.p_cap = j["p_cap"].get<double>();
    cfg.validate();
    return cfg;
}

inline json risk_config_to_json(const RiskConfig& cfg) {
    json j;
    json elements = json::array();
    for (int e = 0; e < kNumRiskElements; ++e)
        if (cfg.enabled[e]) elements.push_back(risk_element_name(static_cast<RiskElement>(e)));
    j["elements"] = elements;
    json knots = json::array();
    for (const auto& [x, p] : cfg.distance_map.knots) knots.push_back(json::array({x, p}));
    j["distance_knots"] = knots;
    j["n_rays"] = cfg.n_rays;
    j["v_safe"] = cfg.v_safe;
    j["r_max_vis"] = cfg.r_max_vis;
    j["agent_cd"] = cfg.agent_cd;
    j["p_granular"] = cfg.p_granular;
    j["p_restricted"] = cfg.p_restricted;
    j["singularity_band_deg"] = rad2deg(cfg.singularity_band);
    j["r_max_sing"] = cfg.r_max_sing;
    j["action_coeff"] = cfg.action_coeff;
    j["turn_coeff"] = cfg.turn_coeff;
    j["tether_coeff"] = cfg.tether_coeff;
    j["contact_prob"] = cfg.contact_prob;
    j["p_floor"] = cfg.p_floor;
    j["p_cap"] = cfg.p_cap;
    json root;
    root["risk"] = j;
    return root;
}

inline RiskConfig load_risk_config(const std::string& path) {
    return risk_config_from_json(io_detail::read_json_file(path));
}

// --- paths and motion plans ---------------------------------------------------

inline std::vector<State> path_from_json(const json& j) {
    if (!j.contains("path")) throw ParseError("path file: missing 'path'");
    std::vector<State> path;
    for (const auto& cell : j["path"]) path.push_back(io_detail::state_from_json(cell));
    return path;
}

inline json path_to_json(const std::vector<State>& path) {
    json cells = json::array();
    for (const State& s : path) cells.push_back(io_detail::state_to_json(s));
    json j;
    j["path"] = cells;
    return j;
}

inline std::vector<State> load_path(const std::string& path) {
    return path_from_json(io_detail::read_json_file(path));
}

inline json motion_plan_to_json(const MotionPlan& plan) {
    json steps = json::array();
    for (const PlanStep& s : plan.steps) {
        json step;
        step["position_m"] = io_detail::vec_to_json(s.waypoint);
        step["contact_m"] = io_detail::vec_to_json(s.contact);
        step["contact_count"] = s.contact_count;
        step["static_length_m"] = s.static_length;
        step["total_length_m"] = s.total_length;
        step["formed"] = s.formed;
        step["relaxed"] = s.relaxed;
        steps.push_back(step);
    }
    json j;
    j["origin_m"] = io_detail::vec_to_json(plan.origin);
    j["waypoints"] = steps;
    return j;
}

inline MotionPlan motion_plan_from_json(const json& j) {
    if (!j.contains("origin_m") || !j.contains("waypoints"))
        throw ParseError("motion plan file: missing 'origin_m' or 'waypoints'");
    MotionPlan plan;
    plan.origin = io_detail::vec_from_json(j["origin_m"]);
    for (const auto& step : j["waypoints"]) {
        PlanStep s;
        s.waypoint = io_detail::vec_from_json(step.at("position_m"));
        s.contact = io_detail::vec_from_json(step.at("contact_m"));
        s.contact_count = step.at("contact_count").get<int>();
        s.static_length = step.at("static_length_m").get<double>();
        if (step.contains("total_length_m")) s.total_length = step.at("total_length_m").get<double>();
        if (step.contains("formed")) s.formed = step.at("formed").get<bool>();
        if (step.contains("relaxed")) s.relaxed = step.at("relaxed").get<bool>();
        plan.steps.push_back(s);
    }
    return plan;
}

inline MotionPlan load_motion_plan(const std::string& path) {
    return motion_plan_from_json(io_detail::read_json_file(path));
}

// --- risk breakdown / plan results ---------------------------------------------

inline json breakdown_to_json(const RiskBreakdown& b, const RiskConfig& cfg) {
    json states = json::array();
    for (size_t i = 0; i < b.states.size(); ++i) {
        json row;
        row["index"] = i;
        for (int e = 0; e < kNumRiskElements; ++e)
            if (cfg.enabled[e])
                row[risk_element_name(static_cast<RiskElement>(e))] = b.states[i].element[e];
        row["finish_probability"] = b.states[i].finish_probability;
        row["cumulative_finish"] = b.states[i].cumulative_finish;
        states.push_back(row);
    }
    json j;
    j["states"] = states;
    j["path_risk"] = b.path_risk;
    return j;
}

inline json vertex_plan_to_json(const VertexPlan& vp) {
    json j;
    j["vertex"] = io_detail::state_to_json(vp.vertex);
    j["reachable"] = vp.reachable;
    if (vp.reachable) {
        j["path"] = path_to_json(vp.path)["path"];
        j["risk"] = vp.risk;
        j["reward"] = vp.reward;
        j["utility"] = vp.utility;
    }
    return j;
}

inline json plan_result_to_json(const PlanResult& result, bool include_ensemble) {
    json j;
    if (result.chosen) j["chosen"] = vertex_plan_to_json(*result.chosen);
    if (include_ensemble) {
        json ens = json::array();
        for (const VertexPlan& vp : result.per_vertex) ens.push_back(vertex_plan_to_json(vp));
        j["ensemble"] = ens;
    }
    json stats;
    stats["expansions"] = result.stats.expansions;
    stats["evaluations"] = result.stats.evaluations;
    stats["paths_seen"] = result.stats.paths_seen;
    stats["lookback"] = result.stats.lookback;
    stats["wall_seconds"] = result.stats.wall_seconds;
    j["stats"] = stats;
    return j;
}

// --- simulator trace -----------------------------------------------------------

inline std::string trace_to_csv(const Trace& trace) {
    std::ostringstream out;
    out << "t,x,y,z,L,theta,phi,contact_count,wp_index\n";
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const TraceSample& s : trace.samples)
        out << s.t << ',' << s.position.x << ',' << s.position.y << ',' << s.position.z << ','
            << s.polar.length << ',' << s.polar.elevation << ',' << s.polar.azimuth << ','
            << s.contact_count << ',' << s.waypoint_index << '\n';
    return out.str();
}

// --- servo files ----------------------------------------------------------------

inline HomTransform transform_from_json(const json& j) {
    io_detail::reject_unknown_fields(j, {"rotation", "translation_m", "pose"}, "transform");
    HomTransform g;
    if (j.contains("pose")) {
        const auto& p = j["pose"];
        ServoPose pose{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(),
                       p.at(3).get<double>(), p.at(4).get<double>(), p.at(5).get<double>()};
        return pose_to_transform(pose);
    }
    if (j.contains("rotation")) {
        const auto& r = j["rotation"];
        if (!r.is_array() || r.size() != 9) throw ParseError("rotation must have 9 entries");
        for (int i = 0; i < 9; ++i) g.rotation.m[i] = r[i].get<double>();
    }
    if (j.contains("translation_m")) g.translation = io_detail::vec_from_json(j["translation_m"]);
    g.validate(1e-6);
    return g;
}

inline std::vector<HomTransform> load_target_trajectory(const std::string& path) {
    json j = io_detail::read_json_file(path);
    if (!j.contains("trajectory")) throw ParseError("trajectory file: missing 'trajectory'");
    std::vector<HomTransform> out;
    for (const auto& entry : j["trajectory"]) out.push_back(transform_from_json(entry));
    return out;
}

inline std::string servo_trace_to_csv(const ServoRunResult& run) {
    std::ostringstream out;
    out << "t,x_d,y_d,z_d,yaw_d,pitch_d,roll_d,x,y,z,yaw,pitch,roll,"
           "e_x,e_y,e_z,e_yaw,e_pitch,e_roll\n";
    out.setf(std::ios::fixed);
    out.precision(6);
    for (const ServoTraceRow& r : run.rows) {
        out << r.t << ',' << r.desired.x << ',' << r.desired.y << ',' << r.desired.z << ','
            << r.desired.yaw << ',' << r.desired.pitch << ',' << r.desired.roll << ','
            << r.actual.x << ',' << r.actual.y << ',' << r.actual.z << ',' << r.actual.yaw
            << ',' << r.actual.pitch << ',' << r.actual.roll;
        for (double e : r.error) out << ',' << e;
        out << '\n';
    }
    return out.str();
}

inline json servo_stats_to_json(const ServoRunResult& run) {
    static const char* axes[6] = {"x", "y", "z", "yaw", "pitch", "roll"};
    json j;
    for (int i = 0; i < 6; ++i) {
        json a;
        a["mean"] = run.stats[i].mean;
        a["rms"] = run.stats[i].rms;
        a["max"] = run.stats[i].max_abs;
        a["sd"] = run.stats[i].sd;
        j[axes[i]] = a;
    }
    return j;
}

}  // namespace tuav
