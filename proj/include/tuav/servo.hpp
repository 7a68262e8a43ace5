// 6-DoF visual servoing math: homogeneous transforms, the desired-
// configuration solver g_gf* = g_gf . g_ft . (g_ft*)^-1, and the per-axis
// rate controller driven against a scripted moving target.
//
// Pose angles follow the camera-aligned convention: yaw about y, pitch
// about x, roll about z, composed R = Ry(yaw) Rx(pitch) Rz(roll).

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tuav/geometry.hpp"

namespace tuav {

struct HomTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation;

    // R^T R = I within tol and det R = +1.
    void validate(double tol = 1e-9) const {
        Mat3 rtr = rotation.transposed() * rotation;
        Mat3 eye = Mat3::identity();
        for (int i = 0; i < 9; ++i)
            if (std::abs(rtr.m[i] - eye.m[i]) > tol)
                throw std::invalid_argument("rotation is not orthonormal");
        if (std::abs(rotation.det() - 1.0) > tol)
            throw std::invalid_argument("rotation must have determinant +1");
    }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

inline HomTransform compose(const HomTransform& a, const HomTransform& b) {
    a.validate();
    b.validate();
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline HomTransform invert(const HomTransform& a) {
    a.validate();
    Mat3 rt = a.rotation.transposed();
    return {rt, -(rt * a.translation)};
}

// Vehicle configuration that makes the observed target transform equal the
// desired view: g_gf* = g_gf . g_ft . (g_ft*)^-1.
inline HomTransform desired_config(const HomTransform& g_gf, const HomTransform& g_ft,
                                   const HomTransform& g_ft_star) {
    return compose(compose(g_gf, g_ft), invert(g_ft_star));
}

struct ServoPose {
    double x = 0.0, y = 0.0, z = 0.0;
    double yaw = 0.0, pitch = 0.0, roll = 0.0;  // rad, wrapped to (-pi, pi]
};

inline HomTransform pose_to_transform(const ServoPose& p) {
    return {rot_y(p.yaw) * rot_x(p.pitch) * rot_z(p.roll), {p.x, p.y, p.z}};
}

// Decomposition of R = Ry(yaw) Rx(pitch) Rz(roll). At pitch = +-90 deg the
// yaw/roll split degenerates; roll is set to zero by convention and
// `gimbal_lock` is flagged.
inline ServoPose transform_to_pose(const HomTransform& g, bool* gimbal_lock = nullptr) {
    const Mat3& r = g.rotation;
    ServoPose p;
    p.x = g.translation.x;
    p.y = g.translation.y;
    p.z = g.translation.z;
    double s = -r(1, 2);  // sin(pitch)
    bool lock = std::abs(s) > 1.0 - 1e-9;
    if (gimbal_lock) *gimbal_lock = lock;
    p.pitch = std::asin(std::clamp(s, -1.0, 1.0));
    if (lock) {
        p.roll = 0.0;
        p.yaw = std::atan2(-r(2, 0), r(0, 0));
    } else {
        p.yaw = std::atan2(r(0, 2), r(2, 2));
        p.roll = std::atan2(r(1, 0), r(1, 1));
    }
    return p;
}

struct ServoGains {
    std::array<double, 6> kp{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};  // x y z yaw pitch roll
    std::array<double, 6> kd{0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
};

struct ServoCommand {
    std::array<double, 6> rate{};  // x y z yaw pitch roll; roll is always 0
};

// Six per-axis PD loops from the current pose toward the desired
// configuration. The gimbal roll is tracked but never commanded, keeping
// the camera upright.
inline ServoCommand servo_step(const ServoPose& current, const HomTransform& target_tf,
                               const HomTransform& desired_view, const ServoGains& gains,
                               std::array<double, 6>* prev_error = nullptr, double dt = 1.0,
                               bool* gimbal_lock = nullptr) {
    HomTransform g_gf = pose_to_transform(current);
    HomTransform want = desired_config(g_gf, target_tf, desired_view);
    ServoPose want_pose = transform_to_pose(want, gimbal_lock);

    std::array<double, 6> e{want_pose.x - current.x,
                            want_pose.y - current.y,
                            want_pose.z - current.z,
                            wrap_angle(want_pose.yaw - current.yaw),
                            wrap_angle(want_pose.pitch - current.pitch),
                            wrap_angle(want_pose.roll - current.roll)};
    ServoCommand cmd;
    for (int i = 0; i < 6; ++i) {
        double de = prev_error ? (e[i] - (*prev_error)[i]) / dt : 0.0;
        cmd.rate[i] = gains.kp[i] * e[i] + gains.kd[i] * de;
    }
    cmd.rate[5] = 0.0;  // gimbal roll is not controlled
    if (prev_error) *prev_error = e;
    return cmd;
}

struct ServoTraceRow {
    double t = 0.0;
    ServoPose desired;
    ServoPose actual;
    std::array<double, 6> error{};
    std::array<double, 6> command{};
};

struct AxisStats {
    double mean = 0.0, rms = 0.0, max_abs = 0.0, sd = 0.0;
};

struct ServoRunResult {
    std::vector<ServoTraceRow> rows;
    std::array<AxisStats, 6> stats;  // x y z yaw pitch roll
};

// Tracks a scripted target trajectory (g_gt per step, poses of the target
// in the ground frame). With exact_tracking the vehicle pose jumps to the
// desired configuration each step; otherwise the rate commands integrate at
// dt.
inline ServoRunResult run_servo(const std::vector<HomTransform>& target_trajectory,
                                const HomTransform& desired_view, const ServoGains& gains,
                                const ServoPose& initial, double dt, bool exact_tracking) {
    if (target_trajectory.empty()) throw std::invalid_argument("empty target trajectory");
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    ServoRunResult out;
    ServoPose pose = initial;
    std::array<double, 6> prev_error{};
    std::array<double, 6> sum{}, sum2{};
    for (size_t step = 0; step < target_trajectory.size(); ++step) {
        HomTransform g_gf = pose_to_transform(pose);
        HomTransform g_ft = compose(invert(g_gf), target_trajectory[step]);
        HomTransform want = desired_config(g_gf, g_ft, desired_view);
        ServoPose want_pose = transform_to_pose(want);
        ServoCommand cmd = servo_step(pose, g_ft, desired_view, gains, &prev_error, dt);

        ServoTraceRow row;
        row.t = step * dt;
        row.desired = want_pose;
        row.actual = pose;
        row.error = {want_pose.x - pose.x,
                     want_pose.y - pose.y,
                     want_pose.z - pose.z,
                     wrap_angle(want_pose.yaw - pose.yaw),
                     wrap_angle(want_pose.pitch - pose.pitch),
                     wrap_angle(want_pose.roll - pose.roll)};
        row.command = cmd.rate;
        out.rows.push_back(row);
        for (int i = 0; i < 6; ++i) {
            sum[i] += row.error[i];
            sum2[i] += row.error[i] * row.error[i];
            out.stats[i].max_abs = std::max(out.stats[i].max_abs, std::abs(row.error[i]));
        }

        if (exact_tracking) {
            pose = want_pose;
        } else {
            pose.x += cmd.rate[0] * dt;
            pose.y += cmd.rate[1] * dt;
            pose.z += cmd.rate[2] * dt;
            pose.yaw = wrap_angle(pose.yaw + cmd.rate[3] * dt);
            pose.pitch = wrap_angle(pose.pitch + cmd.rate[4] * dt);
            pose.roll = wrap_angle(pose.roll + cmd.rate[5] * dt);
        }
    }
    size_t n = out.rows.size();
    for (int i = 0; i < 6; ++i) {
        out.stats[i].mean = sum[i] / n;
        out.stats[i].rms = std::sqrt(sum2[i] / n);
        double var = sum2[i] / n - out.stats[i].mean * out.stats[i].mean;
        out.stats[i].sd = std::sqrt(std::max(0.0, var));
    }
    return out;
}

}  // namespace tuav
