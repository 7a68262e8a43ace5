// Occupancy-grid world model: construction, inflation, graph conversion and
// the geometry queries (segment tests, isovist rays, clearance) shared by
// the risk, planner and tether modules.
//
// Cell (i, j, k) covers the axis-aligned box [i, i+1) x [j, j+1) x [k, k+1)
// in cell units; its center is (i+0.5, j+0.5, k+0.5) * resolution in world
// meters. A map with nz == 1 is treated as planar (the x-y plane).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tuav/geometry.hpp"

namespace tuav {

struct State {
    int i = 0, j = 0, k = 0;

    bool operator==(const State& o) const { return i == o.i && j == o.j && k == o.k; }
    bool operator!=(const State& o) const { return !(*this == o); }
    // Lexicographic order, used for deterministic tie-breaking.
    bool operator<(const State& o) const {
        if (i != o.i) return i < o.i;
        if (j != o.j) return j < o.j;
        return k < o.k;
    }
};

// Displacement between consecutive path states, in cells.
inline double action_norm(const State& from, const State& to) {
    double di = to.i - from.i, dj = to.j - from.j, dk = to.k - from.k;
    return std::sqrt(di * di + dj * dj + dk * dk);
}

struct GraphConfig {
    int connectivity = 26;  // 4 or 8 (planar maps), 6 or 26 (volumetric)
    double r_c = 2.0;       // feasibility radius in cells, ||s_i - s_{i-1}||_2 <= r_c

    void validate(int nz) const {
        if (connectivity != 4 && connectivity != 8 && connectivity != 6 && connectivity != 26)
            throw std::invalid_argument("connectivity must be one of 4, 8, 6, 26");
        if ((connectivity == 4 || connectivity == 8) && nz != 1)
            throw std::invalid_argument("2-D connectivity requires nz == 1");
        if (r_c < 1.0) throw std::invalid_argument("r_c must be >= 1 cell");
    }
};

// Neighbor offsets for a connectivity mode, in a fixed deterministic order.
inline const std::vector<State>& connectivity_offsets(int connectivity) {
    static const std::vector<State> four = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
    static const std::vector<State> eight = [] {
        std::vector<State> v;
        for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di)
                if (di != 0 || dj != 0) v.push_back({di, dj, 0});
        return v;
    }();
    static const std::vector<State> six = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                           {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    static const std::vector<State> twentysix = [] {
        std::vector<State> v;
        for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if (di != 0 || dj != 0 || dk != 0) v.push_back({di, dj, dk});
        return v;
    }();
    switch (connectivity) {
        case 4: return four;
        case 8: return eight;
        case 6: return six;
        case 26: return twentysix;
        default: throw std::invalid_argument("connectivity must be one of 4, 8, 6, 26");
    }
}

class GridMap {
public:
    GridMap() = default;
    GridMap(int nx, int ny, int nz, double resolution)
        : nx_(nx), ny_(ny), nz_(nz), resolution_(resolution),
          occ_(static_cast<size_t>(nx) * ny * nz, 0) {
        if (nx <= 0 || ny <= 0 || nz <= 0)
            throw std::invalid_argument("grid dims must be positive");
        if (resolution <= 0.0) throw std::invalid_argument("resolution must be > 0");
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    double resolution() const { return resolution_; }
    bool planar() const { return nz_ == 1; }

    bool in_bounds(const State& s) const {
        return s.i >= 0 && s.i < nx_ && s.j >= 0 && s.j < ny_ && s.k >= 0 && s.k < nz_;
    }
    bool occupied(const State& s) const { return occ_[index(s)] != 0; }
    bool free(const State& s) const { return in_bounds(s) && !occupied(s); }

    void set_occupied(const State& s, bool value = true) {
        occ_[index(s)] = value ? 1 : 0;
        occupied_cache_dirty_ = true;
    }

    Vec3 cell_center(const State& s) const {
        return {(s.i + 0.5) * resolution_, (s.j + 0.5) * resolution_, (s.k + 0.5) * resolution_};
    }
    // Cell containing a world point; points on a face belong to the upper cell.
    State cell_at(const Vec3& p) const {
        return {static_cast<int>(std::floor(p.x / resolution_)),
                static_cast<int>(std::floor(p.y / resolution_)),
                static_cast<int>(std::floor(p.z / resolution_))};
    }
    bool point_in_bounds(const Vec3& p) const {
        return p.x >= 0.0 && p.x <= nx_ * resolution_ && p.y >= 0.0 &&
               p.y <= ny_ * resolution_ && p.z >= 0.0 && p.z <= nz_ * resolution_;
    }
    bool point_occupied(const Vec3& p) const {
        State s = cell_at(p);
        return in_bounds(s) && occupied(s);
    }

    const std::vector<State>& occupied_cells() const {
        if (occupied_cache_dirty_) {
            occupied_cache_.clear();
            for (int k = 0; k < nz_; ++k)
                for (int j = 0; j < ny_; ++j)
                    for (int i = 0; i < nx_; ++i)
                        if (occ_[index({i, j, k})]) occupied_cache_.push_back({i, j, k});
            occupied_cache_dirty_ = false;
        }
        return occupied_cache_;
    }

    size_t free_cell_count() const {
        size_t n = 0;
        for (uint8_t v : occ_) n += (v == 0);
        return n;
    }

    double reward(const State& s) const {
        auto it = rewards_.find(key(s));
        return it == rewards_.end() ? 0.0 : it->second;
    }
    void set_reward(const State& s, double value) {
        if (value < 0.0) throw std::invalid_argument("rewards must be nonnegative");
        if (!free(s)) throw std::invalid_argument("rewards defined only on free cells");
        rewards_[key(s)] = value;
    }
    const std::map<int64_t, double>& rewards() const { return rewards_; }
    State state_from_key(int64_t k) const {
        int64_t plane = static_cast<int64_t>(nx_) * ny_;
        return {static_cast<int>(k % nx_), static_cast<int>((k % plane) / nx_),
                static_cast<int>(k / plane)};
    }

    State start() const { return start_; }
    void set_start(const State& s) {
        if (!free(s)) throw std::invalid_argument("start must be a free in-bounds cell");
        start_ = s;
    }
    Vec3 tether_origin() const { return tether_origin_; }
    void set_tether_origin(const Vec3& p) { tether_origin_ = p; }
    bool has_poi() const { return has_poi_; }
    Vec3 poi() const { return poi_; }
    void set_poi(const Vec3& p) { poi_ = p; has_poi_ = true; }

    // Checks every stored invariant; throws on the first violation.
    void validate() const {
        if (resolution_ <= 0.0) throw std::invalid_argument("resolution must be > 0");
        if (!in_bounds(start_)) throw std::invalid_argument("start out of bounds");
        if (occupied(start_)) throw std::invalid_argument("start is occupied");
        for (const auto& [k, v] : rewards_) {
            State s = state_from_key(k);
            if (!free(s)) throw std::invalid_argument("reward on non-free cell");
            if (v < 0.0) throw std::invalid_argument("negative reward");
        }
    }

private:
    size_t index(const State& s) const {
        if (!in_bounds(s)) throw std::out_of_range("cell out of bounds");
        return (static_cast<size_t>(s.k) * ny_ + s.j) * nx_ + s.i;
    }
    int64_t key(const State& s) const {
        return (static_cast<int64_t>(s.k) * ny_ + s.j) * nx_ + s.i;
    }

    int nx_ = 1, ny_ = 1, nz_ = 1;
    double resolution_ = 1.0;
    std::vector<uint8_t> occ_;
    mutable std::vector<State> occupied_cache_;
    mutable bool occupied_cache_dirty_ = true;
    std::map<int64_t, double> rewards_;
    State start_{};
    Vec3 tether_origin_{};
    Vec3 poi_{};
    bool has_poi_ = false;
};

// Chebyshev (box) dilation of the occupied set. The start cell must survive.
inline GridMap inflate(const GridMap& map, int radius) {
    if (radius < 0) throw std::invalid_argument("inflation radius must be >= 0");
    GridMap out = map;
    if (radius > 0) {
        for (int k = 0; k < map.nz(); ++k)
            for (int j = 0; j < map.ny(); ++j)
                for (int i = 0; i < map.nx(); ++i) {
                    State s{i, j, k};
                    if (map.occupied(s)) continue;
                    bool near = false;
                    for (int dk = -radius; dk <= radius && !near; ++dk)
                        for (int dj = -radius; dj <= radius && !near; ++dj)
                            for (int di = -radius; di <= radius && !near; ++di) {
                                State n{i + di, j + dj, k + dk};
                                if (map.in_bounds(n) && map.occupied(n)) near = true;
                            }
                    if (near) out.set_occupied(s);
                }
    }
    if (out.occupied(map.start()))
        throw std::invalid_argument("inflation swallows the start cell");
    out.validate();
    return out;
}

// Free in-bounds cells adjacent to s under cfg. Symmetric by construction.
inline std::vector<State> neighbors(const GridMap& map, const State& s, const GraphConfig& cfg) {
    cfg.validate(map.nz());
    if (!map.free(s)) throw std::invalid_argument("neighbors: state must be free and in bounds");
    std::vector<State> out;
    for (const State& d : connectivity_offsets(cfg.connectivity)) {
        State n{s.i + d.i, s.j + d.j, s.k + d.k};
        if (map.free(n)) out.push_back(n);
    }
    return out;
}

// True iff the straight segment a-b intersects any occupied cell. Parametric
// supersampling at resolution/4 so no cell thinner than resolution/2 can be
// stepped over.
inline bool segment_blocked(const GridMap& map, const Vec3& a, const Vec3& b) {
    if (!map.point_in_bounds(a) || !map.point_in_bounds(b))
        throw std::invalid_argument("segment endpoints must lie within world bounds");
    double len = distance(a, b);
    double step = map.resolution() / 4.0;
    int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int t = 0; t <= n; ++t) {
        Vec3 p = a + (b - a) * (static_cast<double>(t) / n);
        if (map.point_occupied(p)) return true;
    }
    return false;
}

// Length of the ray from `from` along `dir` until it enters an occupied cell
// or leaves the map. The map boundary is treated as an obstacle, so the
// returned length is finite.
inline double ray_length(const GridMap& map, const Vec3& from, const Vec3& dir) {
    Vec3 d = dir.normalized();
    double step = map.resolution() / 8.0;
    double max_len = (map.nx() + map.ny() + map.nz()) * map.resolution() * 2.0;
    double t = 0.0;
    double last_clear = 0.0;
    while (t <= max_len) {
        Vec3 p = from + d * t;
        if (!map.point_in_bounds(p)) {
            // refine exit distance against the boundary box by bisection
            double lo = last_clear, hi = t;
            for (int it = 0; it < 40; ++it) {
                double mid = 0.5 * (lo + hi);
                if (map.point_in_bounds(from + d * mid)) lo = mid; else hi = mid;
            }
            return lo;
        }
        if (map.point_occupied(p)) {
            double lo = last_clear, hi = t;
            for (int it = 0; it < 40; ++it) {
                double mid = 0.5 * (lo + hi);
                if (map.point_occupied(from + d * mid)) hi = mid; else lo = mid;
            }
            return lo;
        }
        last_clear = t;
        t += step;
    }
    return max_len;
}

// Isovist ray directions: uniform azimuth sweep for planar maps, Fibonacci
// sphere for volumetric ones. Opposing-ray pairing (i, i + n/2) is preserved
// in the planar case for the clearance computation.
inline std::vector<Vec3> isovist_directions(int n_rays, bool planar_map) {
    if (n_rays < 4) throw std::invalid_argument("need at least 4 isovist rays");
    std::vector<Vec3> dirs;
    dirs.reserve(n_rays);
    if (planar_map) {
        for (int i = 0; i < n_rays; ++i) {
            double a = 2.0 * kPi * i / n_rays;
            dirs.push_back({std::cos(a), std::sin(a), 0.0});
        }
    } else {
        // Fibonacci spiral over the sphere.
        const double golden = kPi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n_rays; ++i) {
            double y = 1.0 - 2.0 * (i + 0.5) / n_rays;
            double r = std::sqrt(std::max(0.0, 1.0 - y * y));
            double a = golden * i;
            dirs.push_back({r * std::cos(a), y, r * std::sin(a)});
        }
    }
    return dirs;
}

// Euclidean distance (meters, center-to-center) from s to the closest
// occupied cell. +inf when the map has no obstacles. Uses the cached
// occupied-cell list.
inline double distance_to_nearest_obstacle(const GridMap& map, const State& s) {
    if (!map.free(s)) throw std::invalid_argument("state must be free and in bounds");
    const auto& occ = map.occupied_cells();
    if (occ.empty()) return std::numeric_limits<double>::infinity();
    Vec3 c = map.cell_center(s);
    double best = std::numeric_limits<double>::infinity();
    for (const State& o : occ) best = std::min(best, distance(c, map.cell_center(o)));
    return best;
}

}  // namespace tuav
