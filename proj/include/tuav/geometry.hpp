// Small vector/matrix types shared by all modules.
//
// World frame convention (used everywhere): x and z span the horizontal
// plane, y points up. Azimuth is measured from +z toward +x, elevation
// from the horizontal plane.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace tuav {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    Vec3 normalized() const {
        double n = norm();
        if (n == 0.0) throw std::domain_error("cannot normalize zero vector");
        return *this / n;
    }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Distance from point p to segment [a, b].
inline double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 ab = b - a;
    double len2 = ab.norm2();
    if (len2 == 0.0) return distance(p, a);
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, a + ab * t);
}

// Row-major 3x3 matrix. Enough linear algebra for the Jacobian and
// rotation work here; not a general-purpose library.
struct Mat3 {
    std::array<double, 9> m{};  // m[3*r + c]

    static Mat3 identity() {
        Mat3 out;
        out.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return out;
    }
    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
        Mat3 out;
        out.m = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
        return out;
    }

    double operator()(int r, int c) const { return m[3 * r + c]; }
    double& operator()(int r, int c) { return m[3 * r + c]; }

    Vec3 row(int r) const { return {m[3 * r], m[3 * r + 1], m[3 * r + 2]}; }
    Vec3 col(int c) const { return {m[c], m[3 + c], m[6 + c]}; }

    Mat3 operator*(const Mat3& o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
                out(r, c) = s;
            }
        return out;
    }
    Vec3 operator*(const Vec3& v) const {
        return {row(0).dot(v), row(1).dot(v), row(2).dot(v)};
    }
    Mat3 transposed() const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) out(r, c) = (*this)(c, r);
        return out;
    }
    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) -
               m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    Mat3 inverse() const {
        double d = det();
        if (std::abs(d) < 1e-300) throw std::domain_error("singular 3x3 matrix");
        Mat3 out;
        out.m = {
            m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
            m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
            m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3]};
        for (double& v : out.m) v /= d;
        return out;
    }
    double frobenius_norm() const {
        double s = 0.0;
        for (double v : m) s += v * v;
        return std::sqrt(s);
    }
};

// Rotations about the world axes.
inline Mat3 rot_x(double a) {
    double c = std::cos(a), s = std::sin(a);
    return Mat3::from_rows({1, 0, 0}, {0, c, -s}, {0, s, c});
}
inline Mat3 rot_y(double a) {
    double c = std::cos(a), s = std::sin(a);
    return Mat3::from_rows({c, 0, s}, {0, 1, 0}, {-s, 0, c});
}
inline Mat3 rot_z(double a) {
    double c = std::cos(a), s = std::sin(a);
    return Mat3::from_rows({c, -s, 0}, {s, c, 0}, {0, 0, 1});
}

}  // namespace tuav
