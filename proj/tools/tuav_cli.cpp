// Command-line entry point wiring all modules together.
//
// Exit codes: 0 success, 1 validation/parse error, 2 domain or planning
// error, 3 internal error. Diagnostics go to stderr; results go to stdout
// or to the requested output files. All randomness sits behind --seed, and
// JSON is emitted with sorted keys, so identical inputs give byte-identical
// outputs.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tuav/io.hpp"
#include "tuav/planner.hpp"
#include "tuav/risk.hpp"
#include "tuav/servo.hpp"
#include "tuav/sim.hpp"
#include "tuav/tether.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

// FNV-1a over the canonical serialized inputs; stable across runs.
uint64_t fnv1a(const std::string& data, uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct ManifestScope {
    std::string subcommand;
    std::vector<std::string> inputs;
    uint64_t digest = fnv1a("");
    unsigned seed = 0;
    bool verbose = false;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void add_input(const std::string& path, const std::string& content) {
        inputs.push_back(path);
        digest = fnv1a(content, digest);
    }
    ~ManifestScope() {
        if (!verbose) return;
        double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        tuav::json m;
        m["subcommand"] = subcommand;
        m["inputs"] = inputs;
        m["config_digest"] = digest;
        m["seed"] = seed;
        m["tool_version"] = kToolVersion;
        m["wall_seconds"] = wall;
        std::cerr << "manifest: " << m.dump() << "\n";
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tuav::ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

tuav::GridMap load_map_tracked(const std::string& path, ManifestScope& scope) {
    std::string text = slurp(path);
    scope.add_input(path, text);
    return tuav::map_from_json(nlohmann::json::parse(text));
}

tuav::RiskConfig load_risk_tracked(const std::string& path, ManifestScope& scope) {
    std::string text = slurp(path);
    scope.add_input(path, text);
    return tuav::risk_config_from_json(nlohmann::json::parse(text));
}

std::vector<tuav::State> load_path_tracked(const std::string& path, ManifestScope& scope) {
    std::string text = slurp(path);
    scope.add_input(path, text);
    return tuav::path_from_json(nlohmann::json::parse(text));
}

void print_risk_table(const tuav::RiskBreakdown& b, const tuav::RiskConfig& cfg,
                      const std::vector<tuav::State>& path) {
    std::printf("%5s %12s", "state", "cell");
    for (int e = 0; e < tuav::kNumRiskElements; ++e)
        if (cfg.enabled[e])
            std::printf(" %13s", tuav::risk_element_name(static_cast<tuav::RiskElement>(e)));
    std::printf(" %13s %13s\n", "P(finish)", "cumulative");
    for (size_t i = 0; i < b.states.size(); ++i) {
        char cell[32];
        std::snprintf(cell, sizeof cell, "(%d,%d,%d)", path[i].i, path[i].j, path[i].k);
        std::printf("%5zu %12s", i, cell);
        for (int e = 0; e < tuav::kNumRiskElements; ++e)
            if (cfg.enabled[e]) std::printf(" %13.6f", b.states[i].element[e]);
        std::printf(" %13.6f %13.6f\n", b.states[i].finish_probability,
                    b.states[i].cumulative_finish);
    }
    std::printf("path risk: %.6f\n", b.path_risk);
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Risk-aware planning and tethered-UAV motion toolkit"};
    app.require_subcommand(1);

    bool json_out = false;
    unsigned seed = 0;
    bool verbose = false;
    app.add_flag("--json", json_out, "machine-readable JSON output");
    app.add_option("--seed", seed, "seed for all randomness (default 0)");
    app.add_flag("--verbose", verbose, "print the run manifest to stderr");

    // ---- map ----
    auto* map_cmd = app.add_subcommand("map", "map tooling");
    map_cmd->require_subcommand(1);
    std::string map_path, out_path;
    int inflate_radius = 1;

    auto* map_validate = map_cmd->add_subcommand("validate", "parse and check a map file");
    map_validate->add_option("--map", map_path, "map file")->required();

    auto* map_inflate = map_cmd->add_subcommand("inflate", "Chebyshev obstacle inflation");
    map_inflate->add_option("--map", map_path, "map file")->required();
    map_inflate->add_option("--radius", inflate_radius, "inflation radius in cells")
        ->check(CLI::NonNegativeNumber);
    map_inflate->add_option("--out", out_path, "output map file")->required();

    // ---- risk ----
    auto* risk_cmd = app.add_subcommand("risk", "evaluate path risk on a map");
    std::string risk_path_file, risk_config_file;
    risk_cmd->add_option("--map", map_path, "map file")->required();
    risk_cmd->add_option("--path", risk_path_file, "path file")->required();
    risk_cmd->add_option("--config", risk_config_file, "risk config file")->required();

    // ---- plan ----
    auto* plan_cmd = app.add_subcommand("plan", "risk-aware reward-maximizing planner");
    std::string plan_mode = "approx";
    double gamma = 1.0;
    int lookback = 2;
    int connectivity = 0;  // 0 = auto (8 planar, 26 volumetric)
    std::string plan_out;
    plan_cmd->add_option("--map", map_path, "map file")->required();
    plan_cmd->add_option("--config", risk_config_file, "risk config file")->required();
    plan_cmd->add_option("--mode", plan_mode, "exact | approx | baseline")
        ->check(CLI::IsMember({"exact", "approx", "baseline"}));
    plan_cmd->add_option("--gamma", gamma, "reward discount in [0, 1]");
    plan_cmd->add_option("--lookback", lookback, "history depth (approx mode)");
    plan_cmd->add_option("--connectivity", connectivity, "4, 8, 6 or 26 (default by dims)");
    plan_cmd->add_option("--out", plan_out, "write the plan result JSON here");

    // ---- tether ----
    auto* tether_cmd = app.add_subcommand("tether", "tether geometry tools");
    tether_cmd->require_subcommand(1);

    auto* tether_reduce = tether_cmd->add_subcommand("reduce", "ray-cast reachable-space reduction");
    tether_reduce->add_option("--map", map_path, "map file")->required();
    tether_reduce->add_option("--out", out_path, "output map file")->required();

    auto* tether_contacts = tether_cmd->add_subcommand("contacts", "contact point planning");
    std::string contacts_path_file;
    tether_contacts->add_option("--map", map_path, "map file")->required();
    tether_contacts->add_option("--path", contacts_path_file, "path file")->required();
    tether_contacts->add_option("--out", out_path, "output 6-D motion plan")->required();

    auto* tether_localize = tether_cmd->add_subcommand("localize", "tether-based localization");
    double loc_length = 0.0, loc_elev_deg = 0.0, loc_azim_deg = 0.0, loc_lean_deg = 90.0;
    double loc_rho = 0.0061, loc_weight = 6.0;
    std::string loc_mode = "tension";
    tether_localize->add_option("--length", loc_length, "encoder tether length, m")->required();
    tether_localize->add_option("--elev-deg", loc_elev_deg, "sensed elevation, deg")->required();
    tether_localize->add_option("--azim-deg", loc_azim_deg, "sensed azimuth, deg")->required();
    tether_localize->add_option("--lean-deg", loc_lean_deg, "vehicle lean angle, deg");
    tether_localize->add_option("--mode", loc_mode, "tension | encoder")
        ->check(CLI::IsMember({"tension", "encoder"}));
    tether_localize->add_option("--rho", loc_rho, "tether linear density, kg/m");
    tether_localize->add_option("--weight", loc_weight, "UAV weight, N");

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "execute a 6-D motion plan kinematically");
    std::string sim_plan_file, sim_controller = "position", sim_noise = "0,0,0";
    std::string sim_trace_file;
    double sim_dt = 0.02, sim_speed = 0.8, sim_racc = 0.4;
    sim_cmd->add_option("--plan", sim_plan_file, "6-D motion plan file")->required();
    sim_cmd->add_option("--map", map_path, "map file (collision checks)")->required();
    sim_cmd->add_option("--controller", sim_controller, "position | velocity | composite")
        ->check(CLI::IsMember({"position", "velocity", "composite"}));
    sim_cmd->add_option("--noise", sim_noise, "sigma_L,sigma_theta,sigma_phi");
    sim_cmd->add_option("--trace", sim_trace_file, "trace CSV output");
    sim_cmd->add_option("--dt", sim_dt, "integration step, s");
    sim_cmd->add_option("--speed", sim_speed, "velocity-mode speed alpha, m/s");
    sim_cmd->add_option("--acceptance-radius", sim_racc, "waypoint acceptance radius, m");

    // ---- servo ----
    auto* servo_cmd = app.add_subcommand("servo", "6-DoF visual servoing against a scripted target");
    std::string servo_traj_file, servo_view_file, servo_gains_file, servo_trace_file;
    double servo_dt = 0.05;
    bool servo_exact = false;
    servo_cmd->add_option("--target-traj", servo_traj_file, "scripted target trajectory")
        ->required();
    servo_cmd->add_option("--desired-view", servo_view_file, "desired view transform")->required();
    servo_cmd->add_option("--gains", servo_gains_file, "gains JSON (kp, kd arrays)");
    servo_cmd->add_option("--trace", servo_trace_file, "trace CSV output");
    servo_cmd->add_option("--dt", servo_dt, "control period, s");
    servo_cmd->add_flag("--exact", servo_exact, "exact tracking (pose jumps to desired)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints usage / message
        return code == 0 ? 0 : 1;
    }

    ManifestScope scope;
    scope.seed = seed;
    scope.verbose = verbose;

    if (map_validate->parsed()) {
        scope.subcommand = "map validate";
        tuav::GridMap map = load_map_tracked(map_path, scope);
        if (json_out) {
            tuav::json j;
            j["valid"] = true;
            j["free_cells"] = map.free_cell_count();
            j["dims"] = tuav::json::array({map.nx(), map.ny(), map.nz()});
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "valid map: " << map.nx() << "x" << map.ny() << "x" << map.nz()
                      << ", " << map.free_cell_count() << " free cells\n";
        }
        return 0;
    }
    if (map_inflate->parsed()) {
        scope.subcommand = "map inflate";
        tuav::GridMap map = load_map_tracked(map_path, scope);
        tuav::GridMap out = tuav::inflate(map, inflate_radius);
        tuav::save_map(out, out_path);
        std::cout << "inflated map written to " << out_path << " ("
                  << out.free_cell_count() << " free cells)\n";
        return 0;
    }
    if (risk_cmd->parsed()) {
        scope.subcommand = "risk";
        tuav::GridMap map = load_map_tracked(map_path, scope);
        tuav::RiskConfig cfg = load_risk_tracked(risk_config_file, scope);
        std::vector<tuav::State> path = load_path_tracked(risk_path_file, scope);
        tuav::RiskBreakdown b = tuav::path_risk_auto(map, path, cfg);
        if (json_out)
            std::cout << tuav::breakdown_to_json(b, cfg).dump(2) << "\n";
        else
            print_risk_table(b, cfg, path);
        return 0;
    }
    if (plan_cmd->parsed()) {
        scope.subcommand = "plan";
        tuav::GridMap map = load_map_tracked(map_path, scope);
        tuav::RiskConfig cfg = load_risk_tracked(risk_config_file, scope);
        tuav::GraphConfig gcfg;
        gcfg.connectivity = connectivity != 0 ? connectivity : (map.planar() ? 8 : 26);
        tuav::RewardConfig rcfg;
        rcfg.gamma = gamma;
        tuav::PlanResult result;
        bool ensemble = false;
        if (plan_mode == "exact") {
            result = tuav::plan_exact(map, cfg, gcfg, rcfg);
        } else if (plan_mode == "approx") {
            result = tuav::plan_risk_aware(map, cfg, gcfg, lookback);
            result = tuav::select_max_utility(result, map, rcfg);
            ensemble = true;
        } else {
            result = tuav::plan_additive_baseline(map, cfg, gcfg);
            ensemble = true;
        }
        tuav::json j = tuav::plan_result_to_json(result, ensemble);
        if (!plan_out.empty()) tuav::io_detail::write_text_file(plan_out, j.dump(2) + "\n");
        if (json_out || plan_out.empty()) std::cout << j.dump(2) << "\n";
        return 0;
    }
    if (tether_reduce->parsed()) {
        scope.subcommand = "tether reduce";
        tuav::GridMap map = load_map_tracked(map_path, scope);
        tuav::GridMap reduced = tuav::ray_cast_reduce(map, map.tether_origin());
        tuav::save_map(reduced, out_path);
        std::cout << "reduced map written to " << out_path << " ("
                  << reduced.free_cell_count() << " of " << map.free_cell_count()
                  << " free cells remain)\n";
        return 0;
    }
    if (tether_contacts->parsed()) {
        scope.subcommand = "tether contacts";
        tuav::GridMap map = load_map_tracked(map_path, scope);
        std::vector<tuav::State> path = load_path_tracked(contacts_path_file, scope);
        tuav::MotionPlan plan = tuav::plan_contacts(map, path, map.tether_origin());
        tuav::io_detail::write_text_file(out_path,
                                         tuav::motion_plan_to_json(plan).dump(2) + "\n");
        std::cout << "motion plan written to " << out_path << " ("
                  << plan.steps.size() << " waypoints)\n";
        return 0;
    }
    if (tether_localize->parsed()) {
        scope.subcommand = "tether localize";
        tuav::CatenaryParams params;
        params.rho = loc_rho;
        params.weight = loc_weight;
        tuav::LocalizeMode mode =
            loc_mode == "tension" ? tuav::LocalizeMode::Tension : tuav::LocalizeMode::Encoder;
        tuav::LocalizeResult res =
            tuav::localize(loc_length, tuav::deg2rad(loc_elev_deg), tuav::deg2rad(loc_azim_deg),
                           tuav::deg2rad(loc_lean_deg), params, mode);
        if (json_out) {
            tuav::json j;
            j["corrected_m"] = tuav::io_detail::vec_to_json(res.corrected);
            j["preliminary_m"] = tuav::io_detail::vec_to_json(res.preliminary);
            j["theta_r_deg"] = tuav::rad2deg(res.correction.theta_r);
            j["length_r_m"] = res.correction.length_r;
            j["arc_length_m"] = res.correction.arc_length;
            j["catenary_a_m"] = res.correction.a;
            std::cout << j.dump(2) << "\n";
        } else {
            std::printf("corrected:   (%.4f, %.4f, %.4f) m\n", res.corrected.x, res.corrected.y,
                        res.corrected.z);
            std::printf("preliminary: (%.4f, %.4f, %.4f) m\n", res.preliminary.x,
                        res.preliminary.y, res.preliminary.z);
            std::printf("theta_r %.4f deg, L_r %.4f m, L_s %.4f m, a %.4f m\n",
                        tuav::rad2deg(res.correction.theta_r), res.correction.length_r,
                        res.correction.arc_length, res.correction.a);
        }
        return 0;
    }
    if (sim_cmd->parsed()) {
        scope.subcommand = "simulate";
        tuav::GridMap map = load_map_tracked(map_path, scope);
        std::string plan_text = slurp(sim_plan_file);
        scope.add_input(sim_plan_file, plan_text);
        tuav::MotionPlan plan = tuav::motion_plan_from_json(nlohmann::json::parse(plan_text));
        tuav::SimConfig cfg;
        cfg.dt = sim_dt;
        cfg.seed = seed;
        if (std::sscanf(sim_noise.c_str(), "%lf,%lf,%lf", &cfg.noise_length,
                        &cfg.noise_elevation, &cfg.noise_azimuth) != 3)
            throw std::invalid_argument("--noise expects sigma_L,sigma_theta,sigma_phi");
        tuav::ControllerGains gains;
        gains.speed = sim_speed;
        gains.acceptance_radius = sim_racc;
        tuav::ControllerKind kind = sim_controller == "position" ? tuav::ControllerKind::Position
                                    : sim_controller == "velocity"
                                        ? tuav::ControllerKind::Velocity
                                        : tuav::ControllerKind::Composite;
        tuav::Trace trace = tuav::execute_plan(plan, kind, gains, cfg, map);
        if (!sim_trace_file.empty())
            tuav::io_detail::write_text_file(sim_trace_file, tuav::trace_to_csv(trace));
        std::vector<tuav::Vec3> waypoints;
        for (const auto& s : plan.steps) waypoints.push_back(s.waypoint);
        tuav::json summary;
        summary["status"] = tuav::sim_status_name(trace.status);
        summary["samples"] = trace.samples.size();
        if (!trace.samples.empty()) {
            tuav::CrossTrackStats xt = tuav::cross_track_error(trace, waypoints);
            summary["cross_track"] = {{"mean", xt.mean}, {"rms", xt.rms}, {"max", xt.max}};
            if (trace.samples.size() >= 3)
                summary["smoothness_rad"] =
                    tuav::smoothness(trace, std::max<size_t>(1, trace.samples.size() / 50));
        }
        std::cout << summary.dump(2) << "\n";
        return trace.status == tuav::SimStatus::Completed ? 0 : 2;
    }
    if (servo_cmd->parsed()) {
        scope.subcommand = "servo";
        std::string traj_text = slurp(servo_traj_file);
        scope.add_input(servo_traj_file, traj_text);
        std::vector<tuav::HomTransform> traj;
        {
            tuav::json j = nlohmann::json::parse(traj_text);
            if (!j.contains("trajectory")) throw tuav::ParseError("trajectory file: missing 'trajectory'");
            for (const auto& entry : j["trajectory"]) traj.push_back(tuav::transform_from_json(entry));
        }
        std::string view_text = slurp(servo_view_file);
        scope.add_input(servo_view_file, view_text);
        tuav::HomTransform view = tuav::transform_from_json(nlohmann::json::parse(view_text));
        tuav::ServoGains gains;
        if (!servo_gains_file.empty()) {
            std::string gains_text = slurp(servo_gains_file);
            scope.add_input(servo_gains_file, gains_text);
            tuav::json j = nlohmann::json::parse(gains_text);
            if (j.contains("kp")) for (int i = 0; i < 6; ++i) gains.kp[i] = j["kp"][i].get<double>();
            if (j.contains("kd")) for (int i = 0; i < 6; ++i) gains.kd[i] = j["kd"][i].get<double>();
        }
        tuav::ServoRunResult run =
            tuav::run_servo(traj, view, gains, tuav::ServoPose{}, servo_dt, servo_exact);
        if (!servo_trace_file.empty())
            tuav::io_detail::write_text_file(servo_trace_file, tuav::servo_trace_to_csv(run));
        std::cout << tuav::servo_stats_to_json(run).dump(2) << "\n";
        return 0;
    }
    std::cerr << "error: no subcommand\n";
    return 1;
}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const tuav::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const tuav::BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const tuav::PlanningError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
