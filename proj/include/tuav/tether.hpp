// Tether geometry and mechanics: polar/Cartesian maps, the free-body tension
// model, catenary deformation correction, reachable-space reduction, contact
// point planning with relaxation, and the executor-side length bookkeeping.

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "tuav/geometry.hpp"
#include "tuav/grid.hpp"

namespace tuav {

// (L, theta, phi): tether length, elevation from horizontal, azimuth.
struct PolarCoord {
    double length = 0.0;
    double elevation = 0.0;  // rad, (-pi/2, pi/2]
    double azimuth = 0.0;    // rad, (-pi, pi]
};

// x = L cos(theta) sin(phi), y = L sin(theta), z = L cos(theta) cos(phi).
inline Vec3 polar_to_cartesian(const PolarCoord& p) {
    return {p.length * std::cos(p.elevation) * std::sin(p.azimuth),
            p.length * std::sin(p.elevation),
            p.length * std::cos(p.elevation) * std::cos(p.azimuth)};
}

// Inverse map. The two-argument arctangent keeps the azimuth quadrant.
inline PolarCoord cartesian_to_polar(const Vec3& v) {
    double L = v.norm();
    if (L == 0.0) throw std::domain_error("polar coordinates undefined at the origin");
    return {L, std::asin(std::clamp(v.y / L, -1.0, 1.0)), std::atan2(v.x, v.z)};
}

struct CatenaryParams {
    double rho = 0.0061;  // tether linear density, kg/m
    double g = 9.81;      // m/s^2
    double weight = 6.0;  // UAV weight G, N

    void validate() const {
        if (rho <= 0.0 || g <= 0.0 || weight <= 0.0)
            throw std::invalid_argument("catenary parameters must be positive");
    }
};

struct TensionResult {
    double thrust = 0.0;   // F, N
    double tension = 0.0;  // T, N
};

// Hover force balance: F cos(beta) = T cos(theta), F sin(beta) = T sin(theta) + G.
// Valid only while sin(beta) - tan(theta) cos(beta) > 0.
inline TensionResult tension(double beta, double theta_s, double weight) {
    if (weight <= 0.0) throw std::invalid_argument("weight must be positive");
    double denom = std::sin(beta) - std::tan(theta_s) * std::cos(beta);
    if (!(denom > 0.0))
        throw std::domain_error("unbalanced regime: sin(beta) - tan(theta) cos(beta) <= 0");
    double f = weight / denom;
    double t = weight * std::cos(beta) /
               (std::sin(beta) * std::cos(theta_s) -
                std::tan(theta_s) * std::cos(theta_s) * std::cos(beta));
    return {f, t};
}

enum class LocalizeMode { Tension, Encoder };

struct CatenaryCorrection {
    double theta_r = 0.0;  // corrected elevation, rad; always < theta_s
    double length_r = 0.0; // straight-line distance reel -> UAV along the chord
    double arc_length = 0.0;  // L_s, arc length of the sagging tether
    double a = 0.0;           // catenary parameter T0 / (rho g)
};

// Recovers the true end-point geometry of a sagging tether from the sensed
// elevation. The curve is y = a cosh(x/a) with tan(theta) = sinh(L_x/a) at
// the UAV end; `a` comes either from the horizontal tension (a = T0/(rho g))
// or from the reeled-out length (a = L_enc/tan(theta), which makes the
// returned arc length reproduce the encoder reading exactly).
inline CatenaryCorrection catenary_correct_from_a(double theta_s, double a) {
    if (!(theta_s > 0.0) || !(theta_s < kPi / 2.0))
        throw std::domain_error("catenary correction needs theta_s in (0, pi/2)");
    if (!(a > 0.0)) throw std::domain_error("catenary parameter a must be positive");
    double tan_t = std::tan(theta_s);
    double lx = a * std::log(tan_t + std::sqrt(tan_t * tan_t + 1.0));  // a * asinh(tan)
    double ly = a * (std::cosh(lx / a) - 1.0);
    CatenaryCorrection out;
    out.a = a;
    out.theta_r = std::atan2(ly, lx);
    out.length_r = std::hypot(lx, ly);
    out.arc_length = a * std::sinh(lx / a);
    return out;
}

inline CatenaryCorrection catenary_correct_tension(double theta_s, double t0,
                                                   const CatenaryParams& params) {
    params.validate();
    if (!(t0 > 0.0)) throw std::domain_error("tension must be positive");
    return catenary_correct_from_a(theta_s, t0 / (params.rho * params.g));
}

inline CatenaryCorrection catenary_correct_encoder(double theta_s, double l_enc) {
    if (!(l_enc > 0.0)) throw std::domain_error("encoder length must be positive");
    if (!(theta_s > 0.0) || !(theta_s < kPi / 2.0))
        throw std::domain_error("catenary correction needs theta_s in (0, pi/2)");
    return catenary_correct_from_a(theta_s, l_enc / std::tan(theta_s));
}

struct LocalizeResult {
    Vec3 corrected;    // deformation-compensated position
    Vec3 preliminary;  // straight-tether assumption
    CatenaryCorrection correction;
};

// Tether-based localization. The azimuth is unaffected by sag, so only
// (L, theta) are corrected before the polar-to-Cartesian map.
inline LocalizeResult localize(double l_enc, double theta_s, double phi_s, double beta,
                               const CatenaryParams& params, LocalizeMode mode) {
    CatenaryCorrection corr;
    if (mode == LocalizeMode::Tension) {
        TensionResult t = tension(beta, theta_s, params.weight);
        corr = catenary_correct_tension(theta_s, t.tension, params);
    } else {
        corr = catenary_correct_encoder(theta_s, l_enc);
    }
    LocalizeResult out;
    out.correction = corr;
    out.corrected = polar_to_cartesian({corr.length_r, corr.theta_r, phi_s});
    out.preliminary = polar_to_cartesian({l_enc, theta_s, phi_s});
    return out;
}

// Blocks every free cell whose straight line of sight to the origin crosses
// an occupied cell ("beyond obstacles along the ray"). Iterated to a fixed
// point so the operation is idempotent.
inline GridMap ray_cast_reduce(const GridMap& map, const Vec3& origin) {
    if (!map.point_in_bounds(origin))
        throw std::invalid_argument("ray-cast origin must lie within world bounds");
    GridMap out = map;
    bool changed = true;
    while (changed) {
        changed = false;
        GridMap snapshot = out;
        for (int k = 0; k < out.nz(); ++k)
            for (int j = 0; j < out.ny(); ++j)
                for (int i = 0; i < out.nx(); ++i) {
                    State s{i, j, k};
                    if (!snapshot.free(s)) continue;
                    if (segment_blocked(snapshot, origin, snapshot.cell_center(s))) {
                        out.set_occupied(s);
                        changed = true;
                    }
                }
    }
    return out;
}

namespace detail {

// Signed area test: > 0 left of ab, < 0 right, 0 collinear.
inline double orient2d(double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

inline bool strictly_inside_triangle_2d(double ax, double ay, double bx, double by,
                                        double cx, double cy, double px, double py) {
    double d1 = orient2d(ax, ay, bx, by, px, py);
    double d2 = orient2d(bx, by, cx, cy, px, py);
    double d3 = orient2d(cx, cy, ax, ay, px, py);
    return (d1 > 0 && d2 > 0 && d3 > 0) || (d1 < 0 && d2 < 0 && d3 < 0);
}

}  // namespace detail

// True iff some occupied cell centroid lies strictly inside the triangle ABC
// in every projection plane. Planar maps use the x-y projection alone; for
// volumetric maps confinement must hold in the x-y, y-z and x-z projections
// simultaneously. A degenerate (collinear) triangle confines nothing.
inline bool obstacle_confined(const Vec3& a, const Vec3& b, const Vec3& c, const GridMap& map) {
    for (const State& o : map.occupied_cells()) {
        Vec3 p = map.cell_center(o);
        bool xy = detail::strictly_inside_triangle_2d(a.x, a.y, b.x, b.y, c.x, c.y, p.x, p.y);
        if (map.planar()) {
            if (xy) return true;
            continue;
        }
        bool yz = detail::strictly_inside_triangle_2d(a.y, a.z, b.y, b.z, c.y, c.z, p.y, p.z);
        bool xz = detail::strictly_inside_triangle_2d(a.x, a.z, b.x, b.z, c.x, c.z, p.x, p.z);
        if (xy && yz && xz) return true;
    }
    return false;
}

class PlanningError : public std::runtime_error {
public:
    explicit PlanningError(const std::string& what) : std::runtime_error(what) {}
};

// Corner of an occupied cell where the taut segment from last_cp first
// catches as the waypoint sweeps from prev_wp to next_wp. Deterministic:
// the grazed corner is the cell corner closest to the tangent segment,
// ties broken lexicographically.
inline Vec3 new_contact_point(const Vec3& last_cp, const Vec3& prev_wp, const Vec3& next_wp,
                              const GridMap& map) {
    if (segment_blocked(map, last_cp, prev_wp))
        throw PlanningError("new_contact_point: tether wrap unresolvable (previous waypoint "
                            "not visible from the contact)");
    if (!segment_blocked(map, last_cp, next_wp))
        throw std::invalid_argument("new_contact_point: segment to next_wp must be blocked");

    // Sweep parameter where the taut segment first touches an obstacle.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        Vec3 wp = prev_wp + (next_wp - prev_wp) * mid;
        if (segment_blocked(map, last_cp, wp)) hi = mid; else lo = mid;
    }
    Vec3 tangent_end = prev_wp + (next_wp - prev_wp) * lo;

    // First blocked cell along the just-blocked segment.
    Vec3 wp_hi = prev_wp + (next_wp - prev_wp) * hi;
    double len = distance(last_cp, wp_hi);
    double step = map.resolution() / 16.0;
    int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    std::optional<State> blocked_cell;
    for (int t = 0; t <= n; ++t) {
        Vec3 p = last_cp + (wp_hi - last_cp) * (static_cast<double>(t) / n);
        if (map.point_occupied(p)) {
            blocked_cell = map.cell_at(p);
            break;
        }
    }
    if (!blocked_cell) throw PlanningError("new_contact_point: no blocking cell found");

    // Candidate corners of the blocking cell. For planar maps the contact
    // lives at the tether plane height (mid-layer).
    std::vector<Vec3> corners;
    double r = map.resolution();
    const State& c = *blocked_cell;
    if (map.planar()) {
        double zc = (c.k + 0.5) * r;
        for (int dj = 0; dj <= 1; ++dj)
            for (int di = 0; di <= 1; ++di)
                corners.push_back({(c.i + di) * r, (c.j + dj) * r, zc});
    } else {
        for (int dk = 0; dk <= 1; ++dk)
            for (int dj = 0; dj <= 1; ++dj)
                for (int di = 0; di <= 1; ++di)
                    corners.push_back({(c.i + di) * r, (c.j + dj) * r, (c.k + dk) * r});
    }

    std::optional<Vec3> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Vec3& corner : corners) {
        if (distance(corner, last_cp) < 1e-6) continue;  // re-grazing the current contact
        double d = point_segment_distance(corner, last_cp, tangent_end);
        bool better = d < best_d - 1e-12;
        bool tie = std::abs(d - best_d) <= 1e-12;
        if (better || (tie && best &&
                       std::tie(corner.x, corner.y, corner.z) <
                           std::tie(best->x, best->y, best->z))) {
            best = corner;
            best_d = d;
        }
    }
    if (!best) throw PlanningError("new_contact_point: no candidate corner");

    // Nudge the corner outward (away from the blocking cell) so segments
    // anchored at the contact never sample inside the obstacle itself.
    Vec3 center = map.cell_center(*blocked_cell);
    double eps = 1e-7 * r;
    auto push_out = [&](double corner_v, double center_v) {
        if (corner_v > center_v + 1e-12) return corner_v + eps;
        if (corner_v < center_v - 1e-12) return corner_v - eps;
        return corner_v;
    };
    return {push_out(best->x, center.x), push_out(best->y, center.y),
            push_out(best->z, center.z)};
}

// Contact-point stack with the static length bookkeeping of the executor.
struct TetherState {
    Vec3 origin;
    std::vector<Vec3> cp_stack;          // bottom is always the origin
    std::vector<double> segment_lengths; // length i spans cp_stack[i] -> cp_stack[i+1]
    double static_length = 0.0;          // L_sta, sum of segment lengths

    explicit TetherState(const Vec3& origin_ = {}) : origin(origin_), cp_stack{origin_} {}

    const Vec3& top() const { return cp_stack.back(); }
    int contact_count() const { return static_cast<int>(cp_stack.size()) - 1; }

    void push(const Vec3& cp) {
        segment_lengths.push_back(distance(top(), cp));
        static_length += segment_lengths.back();
        cp_stack.push_back(cp);
    }
    void pop() {
        if (cp_stack.size() <= 1) throw std::logic_error("cannot pop the tether origin");
        static_length -= segment_lengths.back();
        segment_lengths.pop_back();
        cp_stack.pop_back();
    }

    double total_length(const Vec3& uav) const { return static_length + distance(uav, top()); }
};

// Polar coordinates of p relative to the active contact; the commanded
// length is the effective length plus the static portion behind the stack.
inline PolarCoord effective_polar(const Vec3& p, const TetherState& t) {
    Vec3 rel = p - t.top();
    if (rel.norm() < 1e-12)
        throw std::domain_error("effective polar undefined at the contact point");
    PolarCoord eff = cartesian_to_polar(rel);
    eff.length += t.static_length;
    return eff;
}

// One waypoint of the executable 6-D motion plan.
struct PlanStep {
    Vec3 waypoint;
    Vec3 contact;           // active contact (tether origin when untouched)
    int contact_count = 0;  // stack depth excluding the origin
    double static_length = 0.0;
    double total_length = 0.0;  // static + taut segment to the waypoint
    bool relaxed = false;       // a contact was released at this waypoint
    bool formed = false;        // a contact was created at this waypoint
};

struct MotionPlan {
    Vec3 origin;
    std::vector<PlanStep> steps;
};

// Contact point(s) planning and relaxation over a waypoint sequence.
// Contacts are pushed when the taut segment to the active contact collides,
// and popped when the waypoint regains line of sight to the previous contact
// with no obstacle confined in the wrap triangle. Formed contacts never
// move.
inline MotionPlan plan_contacts(const GridMap& map, const std::vector<Vec3>& waypoints,
                                const Vec3& origin) {
    MotionPlan plan;
    plan.origin = origin;
    TetherState tether(origin);
    Vec3 prev = origin;
    for (size_t w = 0; w < waypoints.size(); ++w) {
        const Vec3& wp = waypoints[w];
        PlanStep step;
        step.waypoint = wp;
        bool relax = false;
        if (tether.cp_stack.size() >= 2) {
            const Vec3& last = tether.cp_stack[tether.cp_stack.size() - 2];
            if (!segment_blocked(map, last, wp))
                relax = !obstacle_confined(tether.top(), last, wp, map);
        }
        if (relax) {
            tether.pop();
            step.relaxed = true;
        } else if (segment_blocked(map, tether.top(), wp)) {
            Vec3 cp;
            try {
                cp = new_contact_point(tether.top(), prev, wp, map);
            } catch (const std::exception& e) {
                throw PlanningError("waypoint " + std::to_string(w) +
                                    ": no valid contact point (" + e.what() + ")");
            }
            tether.push(cp);
            step.formed = true;
        }
        step.contact = tether.top();
        step.contact_count = tether.contact_count();
        step.static_length = tether.static_length;
        step.total_length = tether.total_length(wp);
        plan.steps.push_back(step);
        prev = wp;
    }
    return plan;
}

// plan_contacts over the cell centers of a grid path.
inline MotionPlan plan_contacts(const GridMap& map, const std::vector<State>& path,
                                const Vec3& origin) {
    std::vector<Vec3> wps;
    wps.reserve(path.size());
    for (const State& s : path) {
        if (!map.free(s)) throw std::invalid_argument("path state must be free and in bounds");
        wps.push_back(map.cell_center(s));
    }
    return plan_contacts(map, wps, origin);
}

}  // namespace tuav
