// Per-element, per-state risk probabilities and their aggregation into the
// path risk index: risk(P) = 1 - prod_i prod_k (1 - r_k(s_0..s_i)).
//
// Elements fall into three history classes. Locale elements (distance,
// visibility, scale, singularity) read the current state alone; action
// elements (action length, turn) need up to two states back; traverse
// elements (tether length, contact count) need the whole prefix, supplied
// as a per-state tether trace.

#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tuav/grid.hpp"
#include "tuav/tether.hpp"

namespace tuav {

enum class RiskElement : int {
    Distance = 0,
    Visibility,
    Scale,
    Singularity,
    ActionLength,
    Turn,
    TetherLength,
    ContactCount,
};
inline constexpr int kNumRiskElements = 8;

inline const char* risk_element_name(RiskElement e) {
    switch (e) {
        case RiskElement::Distance: return "distance";
        case RiskElement::Visibility: return "visibility";
        case RiskElement::Scale: return "scale";
        case RiskElement::Singularity: return "singularity";
        case RiskElement::ActionLength: return "action_length";
        case RiskElement::Turn: return "turn";
        case RiskElement::TetherLength: return "tether_length";
        case RiskElement::ContactCount: return "contact_count";
    }
    return "?";
}

// Non-increasing piecewise-linear map from a nonnegative quantity to a
// probability. Below the first knot the first value holds; beyond the last
// knot the last value holds.
struct PiecewiseLinearMap {
    std::vector<std::pair<double, double>> knots;  // (input, probability), input ascending

    static PiecewiseLinearMap ramp(double x_safe, double p_max) {
        return {{{0.0, p_max}, {x_safe, 0.0}}};
    }

    void validate() const {
        if (knots.empty()) throw std::invalid_argument("piecewise map needs at least one knot");
        for (size_t i = 1; i < knots.size(); ++i) {
            if (knots[i].first <= knots[i - 1].first)
                throw std::invalid_argument("piecewise map knots must be strictly ascending");
            if (knots[i].second > knots[i - 1].second)
                throw std::invalid_argument("piecewise map must be non-increasing");
        }
        for (const auto& [x, p] : knots)
            if (p < 0.0 || p >= 1.0)
                throw std::invalid_argument("piecewise map probabilities must lie in [0, 1)");
    }

    double operator()(double x) const {
        if (x <= knots.front().first) return knots.front().second;
        if (x >= knots.back().first) return knots.back().second;
        for (size_t i = 1; i < knots.size(); ++i) {
            if (x <= knots[i].first) {
                const auto& [x0, p0] = knots[i - 1];
                const auto& [x1, p1] = knots[i];
                return p0 + (p1 - p0) * (x - x0) / (x1 - x0);
            }
        }
        return knots.back().second;
    }
};

struct RiskConfig {
    std::array<bool, kNumRiskElements> enabled{};  // all off by default

    // distance to closest obstacle (meters -> probability)
    PiecewiseLinearMap distance_map = PiecewiseLinearMap::ramp(2.0, 0.1);

    // visibility (mean isovist length, meters -> probability)
    int n_rays = 16;
    double v_safe = 5.0;
    double r_max_vis = 0.1;

    // scale of characteristic dimension
    double agent_cd = 0.5;       // A_cd, meters
    double p_granular = 0.2;     // E_cd/A_cd <= 1
    double p_restricted = 0.05;  // E_cd/A_cd <= 2

    // motion singularity around 90 deg elevation
    double singularity_band = deg2rad(10.0);  // band below 90 deg where risk ramps up
    double r_max_sing = 0.2;

    // action-dependent coefficients
    double action_coeff = 0.04;  // probability per cell of motion
    double turn_coeff = 0.04 / std::sqrt(2.0);  // per unit ||a_i - a_{i-1}|| in cells

    // traverse-dependent coefficients
    double tether_coeff = 0.005;     // probability per meter of total tether
    double contact_prob = 0.03;      // per contact point

    // global probability clamp
    double p_floor = 0.0;
    double p_cap = 0.95;

    bool uses(RiskElement e) const { return enabled[static_cast<int>(e)]; }
    void enable(RiskElement e, bool on = true) { enabled[static_cast<int>(e)] = on; }
    bool uses_tether_trace() const {
        return uses(RiskElement::TetherLength) || uses(RiskElement::ContactCount);
    }

    double clamp(double p) const { return std::clamp(p, p_floor, p_cap); }

    void validate() const {
        if (p_floor < 0.0 || p_cap >= 1.0 || p_floor > p_cap)
            throw std::invalid_argument("need 0 <= p_floor <= p_cap < 1");
        distance_map.validate();
        if (n_rays < 4) throw std::invalid_argument("n_rays must be >= 4");
        if (v_safe <= 0.0) throw std::invalid_argument("v_safe must be positive");
        if (agent_cd <= 0.0) throw std::invalid_argument("agent_cd must be positive");
        if (singularity_band <= 0.0 || singularity_band >= kPi / 2.0)
            throw std::invalid_argument("singularity band must lie in (0, pi/2)");
        for (double c : {r_max_vis, p_granular, p_restricted, r_max_sing, action_coeff,
                         turn_coeff, tether_coeff, contact_prob})
            if (c < 0.0 || c >= 1.0)
                throw std::invalid_argument("risk coefficients must lie in [0, 1)");
    }
};

// --- locale-dependent elements -------------------------------------------

inline double distance_risk(const GridMap& map, const State& s, const RiskConfig& cfg) {
    double d = distance_to_nearest_obstacle(map, s);
    if (std::isinf(d)) return cfg.p_floor;
    return cfg.clamp(cfg.distance_map(d));
}

// Mean isovist ray length from the cell center, rays truncated at obstacles
// or the map boundary.
inline double visibility(const GridMap& map, const State& s, int n_rays) {
    if (!map.free(s)) throw std::invalid_argument("state must be free and in bounds");
    Vec3 c = map.cell_center(s);
    double sum = 0.0;
    for (const Vec3& d : isovist_directions(n_rays, map.planar())) sum += ray_length(map, c, d);
    return sum / n_rays;
}

inline double visibility_risk(double v, const RiskConfig& cfg) {
    if (v < 0.0) throw std::invalid_argument("visibility must be nonnegative");
    if (v >= cfg.v_safe) return cfg.p_floor;
    return cfg.clamp(cfg.r_max_vis * (1.0 - v / cfg.v_safe));
}

// E_cd measured as the smallest opposing-ray clearance through the state.
// Requires an even ray count so rays pair up (i, i + n/2).
inline double environment_cd(const GridMap& map, const State& s, int n_rays) {
    if (n_rays % 2 != 0) throw std::invalid_argument("opposing rays need an even ray count");
    if (!map.free(s)) throw std::invalid_argument("state must be free and in bounds");
    Vec3 c = map.cell_center(s);
    auto dirs = isovist_directions(n_rays, map.planar());
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_rays / 2; ++i) {
        double span = ray_length(map, c, dirs[i]) + ray_length(map, c, dirs[i + n_rays / 2]);
        best = std::min(best, span);
    }
    return best;
}

inline double scale_risk(const GridMap& map, const State& s, const RiskConfig& cfg) {
    // Planar-map opposing rays pair exactly; the Fibonacci sphere pairs only
    // approximately, which is acceptable for a minimum over many pairs.
    int n = cfg.n_rays % 2 == 0 ? cfg.n_rays : cfg.n_rays + 1;
    double ratio = environment_cd(map, s, n) / cfg.agent_cd;
    if (ratio <= 1.0) return cfg.clamp(cfg.p_granular);
    if (ratio <= 2.0) return cfg.clamp(cfg.p_restricted);
    return cfg.p_floor;
}

// Risk of the unstable region above the tether reel. Ramps from the floor at
// (90 deg - band) to r_max_sing at 90 deg elevation.
inline double singularity_risk(const Vec3& p, const Vec3& tether_origin, const RiskConfig& cfg) {
    Vec3 rel = p - tether_origin;
    double n = rel.norm();
    if (n < 1e-12) return cfg.clamp(cfg.r_max_sing);  // directly at the reel
    double elev = std::abs(std::asin(std::clamp(rel.y / n, -1.0, 1.0)));
    double band_lo = kPi / 2.0 - cfg.singularity_band;
    if (elev <= band_lo) return cfg.p_floor;
    double t = (elev - band_lo) / cfg.singularity_band;
    return cfg.clamp(cfg.p_floor + t * (cfg.r_max_sing - cfg.p_floor));
}

inline double singularity_risk(const GridMap& map, const State& s, const RiskConfig& cfg) {
    if (!map.free(s)) throw std::invalid_argument("state must be free and in bounds");
    return singularity_risk(map.cell_center(s), map.tether_origin(), cfg);
}

// --- action-dependent elements --------------------------------------------

inline double action_length_risk(const State& prev, const State& cur, const RiskConfig& cfg) {
    return cfg.clamp(cfg.action_coeff * action_norm(prev, cur));
}

inline double turn_risk(const State& a, const State& b, const State& c, const RiskConfig& cfg) {
    double di = (c.i - b.i) - (b.i - a.i);
    double dj = (c.j - b.j) - (b.j - a.j);
    double dk = (c.k - b.k) - (b.k - a.k);
    return cfg.clamp(cfg.turn_coeff * std::sqrt(di * di + dj * dj + dk * dk));
}

// --- traverse-dependent elements -------------------------------------------

inline double tether_length_risk(double total_length, const RiskConfig& cfg) {
    if (total_length < 0.0) throw std::invalid_argument("tether length must be nonnegative");
    return cfg.clamp(cfg.tether_coeff * total_length);
}

inline double contact_count_risk(int n_contacts, const RiskConfig& cfg) {
    if (n_contacts < 0) throw std::invalid_argument("contact count must be nonnegative");
    double p = 1.0 - std::pow(1.0 - cfg.contact_prob, n_contacts);
    return cfg.clamp(p);
}

// --- aggregation ------------------------------------------------------------

struct StateRisk {
    std::array<double, kNumRiskElements> element{};  // 0 for disabled elements
    double finish_probability = 1.0;                 // prod_k (1 - r_k)
    double cumulative_finish = 1.0;                  // prod over states so far
};

struct RiskBreakdown {
    std::vector<StateRisk> states;
    double path_risk = 0.0;
};

inline constexpr double kDefaultFeasibilityRadius = 1.7320508075688772;  // one 26-conn step

// Evaluates every enabled element at every state and aggregates in
// log-complement space. The tether trace must align with the path when a
// traverse element is enabled; the capped probabilities keep the logs finite.
inline RiskBreakdown path_risk(const GridMap& map, const std::vector<State>& path,
                               const RiskConfig& cfg,
                               std::span<const PlanStep> tether_trace = {},
                               double r_c = kDefaultFeasibilityRadius) {
    cfg.validate();
    if (path.empty()) throw std::invalid_argument("path must contain at least one state");
    for (const State& s : path) {
        if (!map.in_bounds(s)) throw std::invalid_argument("path state out of bounds");
        if (map.occupied(s)) throw std::invalid_argument("path state is occupied");
    }
    for (size_t i = 1; i < path.size(); ++i)
        if (action_norm(path[i - 1], path[i]) > r_c + 1e-12)
            throw std::invalid_argument("infeasible path: consecutive gap exceeds r_c");
    if (cfg.uses_tether_trace() && tether_trace.size() != path.size())
        throw std::invalid_argument("tether trace must align with the path");

    RiskBreakdown out;
    out.states.resize(path.size());
    double log_path_survival = 0.0;
    for (size_t i = 0; i < path.size(); ++i) {
        StateRisk& sr = out.states[i];
        auto put = [&](RiskElement e, double p) { sr.element[static_cast<int>(e)] = p; };
        if (cfg.uses(RiskElement::Distance)) put(RiskElement::Distance, distance_risk(map, path[i], cfg));
        if (cfg.uses(RiskElement::Visibility))
            put(RiskElement::Visibility, visibility_risk(visibility(map, path[i], cfg.n_rays), cfg));
        if (cfg.uses(RiskElement::Scale)) put(RiskElement::Scale, scale_risk(map, path[i], cfg));
        if (cfg.uses(RiskElement::Singularity))
            put(RiskElement::Singularity, singularity_risk(map, path[i], cfg));
        if (cfg.uses(RiskElement::ActionLength) && i >= 1)
            put(RiskElement::ActionLength, action_length_risk(path[i - 1], path[i], cfg));
        if (cfg.uses(RiskElement::Turn) && i >= 2)
            put(RiskElement::Turn, turn_risk(path[i - 2], path[i - 1], path[i], cfg));
        if (cfg.uses(RiskElement::TetherLength))
            put(RiskElement::TetherLength, tether_length_risk(tether_trace[i].total_length, cfg));
        if (cfg.uses(RiskElement::ContactCount))
            put(RiskElement::ContactCount, contact_count_risk(tether_trace[i].contact_count, cfg));

        double log_state_survival = 0.0;
        for (double p : sr.element) log_state_survival += std::log1p(-p);
        sr.finish_probability = std::exp(log_state_survival);
        log_path_survival += log_state_survival;
        sr.cumulative_finish = std::exp(log_path_survival);
    }
    out.path_risk = -std::expm1(log_path_survival);
    return out;
}

// Convenience wrapper that computes the tether trace itself when traverse
// elements are enabled.
inline RiskBreakdown path_risk_auto(const GridMap& map, const std::vector<State>& path,
                                    const RiskConfig& cfg,
                                    double r_c = kDefaultFeasibilityRadius) {
    if (cfg.uses_tether_trace()) {
        MotionPlan mp = plan_contacts(map, path, map.tether_origin());
        return path_risk(map, path, cfg, mp.steps, r_c);
    }
    return path_risk(map, path, cfg, {}, r_c);
}

}  // namespace tuav
