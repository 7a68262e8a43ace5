// Kinematic execution of 6-D motion plans under the two tether-based motion
// primitives. The plant is a pure integrator on (L, theta, phi); commands
// are rates in those channels and the world position follows from the
// active contact frame, so the executor's frame shifting is exercised
// exactly as flown.

#pragma once

#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tuav/geometry.hpp"
#include "tuav/grid.hpp"
#include "tuav/tether.hpp"

namespace tuav {

struct ControlCommand {
    double d_length = 0.0;     // m/s
    double d_elevation = 0.0;  // rad/s
    double d_azimuth = 0.0;    // rad/s
};

struct ActuatorLimits {
    double d_length_max = 2.0;
    double d_elevation_max = 1.5;
    double d_azimuth_max = 1.5;

    ControlCommand clamp(const ControlCommand& u) const {
        return {std::clamp(u.d_length, -d_length_max, d_length_max),
                std::clamp(u.d_elevation, -d_elevation_max, d_elevation_max),
                std::clamp(u.d_azimuth, -d_azimuth_max, d_azimuth_max)};
    }
};

struct ControllerGains {
    double kp_length = 1.2, kd_length = 0.1;
    double kp_elevation = 1.2, kd_elevation = 0.1;
    double kp_azimuth = 1.2, kd_azimuth = 0.1;
    double speed = 0.8;              // alpha, commanded speed for velocity mode, m/s
    double acceptance_radius = 0.4;  // R_acc, m

    void validate() const {
        for (double g : {kp_length, kd_length, kp_elevation, kd_elevation, kp_azimuth,
                         kd_azimuth})
            if (g < 0.0) throw std::invalid_argument("controller gains must be >= 0");
        if (speed <= 0.0) throw std::invalid_argument("speed must be positive");
        if (acceptance_radius <= 0.0)
            throw std::invalid_argument("acceptance radius must be positive");
    }
};

struct SimConfig {
    double dt = 0.02;
    int max_steps_per_waypoint = 20000;
    double noise_length = 0.0;     // Gaussian std per sensing channel
    double noise_elevation = 0.0;
    double noise_azimuth = 0.0;
    ActuatorLimits limits;
    double theta_guard = deg2rad(80.0);   // velocity-mode singularity guard
    double guard_hysteresis = deg2rad(2.0);
    double kappa_max = 1e6;  // Jacobian condition ceiling (Frobenius estimate)
    unsigned seed = 0;

    void validate() const {
        if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
        if (max_steps_per_waypoint <= 0)
            throw std::invalid_argument("max_steps_per_waypoint must be positive");
        if (theta_guard >= kPi / 2.0)
            throw std::invalid_argument("theta_guard must be below 90 degrees");
    }
};

enum class ControllerKind { Position, Velocity, Composite };

enum class SimStatus { Completed, Stuck, SingularityAbort, Collision };

inline const char* sim_status_name(SimStatus s) {
    switch (s) {
        case SimStatus::Completed: return "completed";
        case SimStatus::Stuck: return "stuck";
        case SimStatus::SingularityAbort: return "singularity_abort";
        case SimStatus::Collision: return "collision";
    }
    return "?";
}

struct TraceSample {
    double t = 0.0;
    Vec3 position;       // world frame
    PolarCoord polar;    // relative to the active contact, length includes L_sta
    int contact_count = 0;
    int waypoint_index = 0;
};

struct Trace {
    std::vector<TraceSample> samples;
    SimStatus status = SimStatus::Completed;
};

struct PolarError {
    double e_length = 0.0, e_elevation = 0.0, e_azimuth = 0.0;
};

// Three independent PD loops on the tether channels. The azimuth error is
// wrapped to (-pi, pi] before the gains apply.
inline ControlCommand position_step(const PolarCoord& sensed, const PolarCoord& desired,
                                    const ControllerGains& gains, const PolarError& prev_error,
                                    double dt, PolarError* error_out = nullptr,
                                    const ActuatorLimits& limits = {}) {
    PolarError e;
    e.e_length = desired.length - sensed.length;
    e.e_elevation = desired.elevation - sensed.elevation;
    e.e_azimuth = wrap_angle(desired.azimuth - sensed.azimuth);
    ControlCommand u;
    u.d_length = gains.kp_length * e.e_length +
                 gains.kd_length * (e.e_length - prev_error.e_length) / dt;
    u.d_elevation = gains.kp_elevation * e.e_elevation +
                    gains.kd_elevation * (e.e_elevation - prev_error.e_elevation) / dt;
    u.d_azimuth = gains.kp_azimuth * e.e_azimuth +
                  gains.kd_azimuth * (e.e_azimuth - prev_error.e_azimuth) / dt;
    if (error_out) *error_out = e;
    return limits.clamp(u);
}

// d(x, y, z)/dt = J * d(L, theta, phi)/dt for the polar-to-Cartesian map.
inline Mat3 jacobian(const PolarCoord& p) {
    double ct = std::cos(p.elevation), st = std::sin(p.elevation);
    double cp = std::cos(p.azimuth), sp = std::sin(p.azimuth);
    double L = p.length;
    return Mat3::from_rows({ct * sp, -L * st * sp, L * ct * cp},
                           {st, L * ct, 0.0},
                           {ct * cp, -L * st * cp, -L * ct * sp});
}

// Inverse-Jacobian velocity controller aiming straight at the target.
// Throws when the configuration is inside the singularity guard band or the
// Jacobian is ill-conditioned.
inline ControlCommand velocity_step(const Vec3& current, const Vec3& target,
                                    const PolarCoord& p, const ControllerGains& gains,
                                    const SimConfig& cfg) {
    if (std::abs(p.elevation) >= cfg.theta_guard)
        throw std::domain_error("velocity control near the 90 deg elevation singularity");
    Mat3 j = jacobian(p);
    Mat3 j_inv = j.inverse();
    if (j.frobenius_norm() * j_inv.frobenius_norm() > cfg.kappa_max)
        throw std::domain_error("velocity control: Jacobian condition number too large");
    Vec3 delta = target - current;
    double n = delta.norm();
    if (n == 0.0) return {};
    Vec3 xdot = delta * (gains.speed / n);
    Vec3 u = j_inv * xdot;
    return cfg.limits.clamp({u.x, u.y, u.z});
}

// Runs a 6-D motion plan (waypoints with active contacts) through the
// kinematic plant. The polar state is canonical and lives in the frame of
// the active contact; the world position is reconstructed from it each
// step, and the frame is rebased whenever the target waypoint's contact
// changes. Waypoints are accepted within the acceptance radius of the
// noisy-sensed position; sensing noise is additive Gaussian on (L, theta,
// phi).
inline Trace execute_plan(const MotionPlan& plan, ControllerKind controller,
                          const ControllerGains& gains, const SimConfig& cfg,
                          const GridMap& map) {
    gains.validate();
    cfg.validate();
    if (plan.steps.empty()) throw std::invalid_argument("empty motion plan");

    std::mt19937 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto noisy = [&](const PolarCoord& p) {
        PolarCoord out = p;
        if (cfg.noise_length > 0.0) out.length += cfg.noise_length * gauss(rng);
        if (cfg.noise_elevation > 0.0) out.elevation += cfg.noise_elevation * gauss(rng);
        if (cfg.noise_azimuth > 0.0) out.azimuth = wrap_angle(out.azimuth + cfg.noise_azimuth * gauss(rng));
        return out;
    };

    Trace trace;
    // Start hovering at the first waypoint's frame, at the first waypoint.
    Vec3 contact = plan.steps.front().contact;
    double static_len = plan.steps.front().static_length;
    Vec3 position = plan.steps.front().waypoint;
    PolarCoord rel = cartesian_to_polar(position - contact);

    double t = 0.0;
    PolarError prev_error;
    bool velocity_active = controller != ControllerKind::Position;

    for (size_t w = 0; w < plan.steps.size(); ++w) {
        const PlanStep& step = plan.steps[w];
        // Frame shift: rebase the polar state on the new contact, keeping
        // the world position continuous.
        if (distance(step.contact, contact) > 1e-12 ||
            std::abs(step.static_length - static_len) > 1e-12) {
            contact = step.contact;
            static_len = step.static_length;
            rel = cartesian_to_polar(position - contact);
            prev_error = {};
        }
        PolarCoord desired = cartesian_to_polar(step.waypoint - contact);
        desired.length += static_len;

        int steps_left = cfg.max_steps_per_waypoint;
        while (true) {
            if (steps_left-- <= 0) {
                trace.status = SimStatus::Stuck;
                return trace;
            }
            PolarCoord sensed_rel = noisy(rel);
            PolarCoord sensed_total = sensed_rel;
            sensed_total.length += static_len;
            Vec3 sensed_pos = contact + polar_to_cartesian(sensed_rel);

            trace.samples.push_back({t, position, sensed_total, step.contact_count,
                                     static_cast<int>(w)});

            if (distance(sensed_pos, step.waypoint) <= gains.acceptance_radius) break;

            ControlCommand u;
            bool near_singularity = std::abs(rel.elevation) >= cfg.theta_guard;
            if (controller == ControllerKind::Composite) {
                // switch with hysteresis around the guard angle
                if (velocity_active && near_singularity) velocity_active = false;
                else if (!velocity_active &&
                         std::abs(rel.elevation) < cfg.theta_guard - cfg.guard_hysteresis)
                    velocity_active = true;
            }
            bool use_velocity = controller == ControllerKind::Velocity ||
                                (controller == ControllerKind::Composite && velocity_active);
            if (use_velocity) {
                if (controller == ControllerKind::Velocity && near_singularity) {
                    trace.status = SimStatus::SingularityAbort;
                    return trace;
                }
                try {
                    u = velocity_step(sensed_pos, step.waypoint, sensed_rel, gains, cfg);
                } catch (const std::domain_error&) {
                    trace.status = SimStatus::SingularityAbort;
                    return trace;
                }
            } else {
                u = position_step(sensed_total, desired, gains, prev_error, cfg.dt,
                                  &prev_error, cfg.limits);
            }

            rel.length = std::max(1e-6, rel.length + u.d_length * cfg.dt);
            rel.elevation =
                std::clamp(rel.elevation + u.d_elevation * cfg.dt, -kPi / 2.0 + 1e-9, kPi / 2.0);
            rel.azimuth = wrap_angle(rel.azimuth + u.d_azimuth * cfg.dt);
            position = contact + polar_to_cartesian(rel);
            t += cfg.dt;

            if (map.point_in_bounds(position) && map.point_occupied(position)) {
                trace.samples.push_back({t, position, sensed_total, step.contact_count,
                                         static_cast<int>(w)});
                trace.status = SimStatus::Collision;
                return trace;
            }
        }
    }
    trace.status = SimStatus::Completed;
    return trace;
}

struct CrossTrackStats {
    double mean = 0.0, rms = 0.0, max = 0.0;
};

// Distance from each trace point to the piecewise-linear ideal path.
inline CrossTrackStats cross_track_error(const Trace& trace, const std::vector<Vec3>& plan) {
    if (trace.samples.empty()) throw std::invalid_argument("empty trace");
    if (plan.empty()) throw std::invalid_argument("empty plan");
    CrossTrackStats out;
    double sum = 0.0, sum2 = 0.0;
    for (const TraceSample& s : trace.samples) {
        double best = std::numeric_limits<double>::infinity();
        if (plan.size() == 1) {
            best = distance(s.position, plan[0]);
        } else {
            for (size_t i = 0; i + 1 < plan.size(); ++i)
                best = std::min(best, point_segment_distance(s.position, plan[i], plan[i + 1]));
        }
        sum += best;
        sum2 += best * best;
        out.max = std::max(out.max, best);
    }
    out.mean = sum / trace.samples.size();
    out.rms = std::sqrt(sum2 / trace.samples.size());
    return out;
}

// Mean turning angle between successive displacement vectors of the trace
// thinned to every `window`-th sample. Needs at least three resampled
// points.
inline double smoothness(const Trace& trace, int window) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    std::vector<Vec3> pts;
    for (size_t i = 0; i < trace.samples.size(); i += window)
        pts.push_back(trace.samples[i].position);
    if (pts.size() < 3) throw std::invalid_argument("trace too short for smoothness");
    double sum = 0.0;
    int count = 0;
    for (size_t i = 2; i < pts.size(); ++i) {
        Vec3 a = pts[i - 1] - pts[i - 2];
        Vec3 b = pts[i] - pts[i - 1];
        double na = a.norm(), nb = b.norm();
        if (na < 1e-12 || nb < 1e-12) continue;
        double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
        sum += std::acos(c);
        ++count;
    }
    if (count == 0) throw std::invalid_argument("trace has no displacement");
    return sum / count;
}

// Evenly spaced waypoints along a polyline, used to build the density
// sweeps of the accuracy experiments.
inline std::vector<Vec3> densify_polyline(const std::vector<Vec3>& corners, double spacing) {
    if (corners.size() < 2) throw std::invalid_argument("polyline needs at least two corners");
    if (spacing <= 0.0) throw std::invalid_argument("spacing must be positive");
    std::vector<Vec3> out{corners.front()};
    for (size_t i = 0; i + 1 < corners.size(); ++i) {
        Vec3 a = corners[i], b = corners[i + 1];
        double len = distance(a, b);
        int n = std::max(1, static_cast<int>(std::round(len / spacing)));
        for (int s = 1; s <= n; ++s) out.push_back(a + (b - a) * (static_cast<double>(s) / n));
    }
    return out;
}

}  // namespace tuav
