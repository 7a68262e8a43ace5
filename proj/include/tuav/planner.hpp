// Risk-aware reward-maximizing planners over the grid graph.
//
// plan_exact enumerates all simple paths (Alg. "Evaluate_All_Simple_Paths"
// style) and is guarded by a vertex budget. plan_risk_aware is the
// directional-component search: each vertex is split into components keyed
// by the incoming direction history, the open component of minimum risk is
// closed, and every extension re-evaluates the full path risk, so locale-
// and action-dependent elements are handled optimally while traverse
// elements are handled on a best-effort basis. select_max_utility is the
// lower-stage reward maximizer; plan_additive_baseline is the conventional
// additive-risk comparator.

#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tuav/grid.hpp"
#include "tuav/risk.hpp"
#include "tuav/tether.hpp"

namespace tuav {

struct RewardConfig {
    double gamma = 1.0;  // discount applied to already-collected reward on extension

    void validate() const {
        if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0, 1]");
    }
};

struct PlanLimits {
    size_t max_vertices = 16;      // exact-planner guard
    size_t max_paths = 10'000'000; // enumeration guard
};

class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct VertexPlan {
    State vertex{};
    std::vector<State> path;  // empty when unreachable
    double risk = std::numeric_limits<double>::infinity();  // sentinel when unreachable
    double reward = 0.0;
    double utility = 0.0;
    double additive_cost = 0.0;  // baseline planner only
    bool reachable = false;
};

struct PlanStats {
    size_t expansions = 0;     // components closed / DFS nodes visited
    size_t evaluations = 0;    // full path-risk evaluations
    size_t paths_seen = 0;     // exact mode only
    double wall_seconds = 0.0;
    int lookback = 2;
};

struct PlanResult {
    std::vector<VertexPlan> per_vertex;
    std::optional<VertexPlan> chosen;
    PlanStats stats;
};

inline constexpr double kUtilityEpsilon = 1e-9;  // divisor guard for zero-risk paths

// Collected reward of a path under the extension rule
// reward <- gamma * reward + rewards(v); the start state's reward is not
// collected (it has no incoming edge).
inline double collected_reward(const GridMap& map, const std::vector<State>& path, double gamma) {
    double reward = 0.0;
    for (size_t i = 1; i < path.size(); ++i) reward = gamma * reward + map.reward(path[i]);
    return reward;
}

// (risk, length, lexicographic states): the deterministic total order used
// everywhere a tie must be broken.
inline bool path_order_less(double risk_a, const std::vector<State>& a, double risk_b,
                            const std::vector<State>& b) {
    if (risk_a != risk_b) return risk_a < risk_b;
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace detail {

// Shared incremental path evaluator. Locale log-survivals are cached per
// cell (they do not depend on history); action and turn terms come from the
// coordinates; traverse terms replay the contact algorithm step by step.
class PathEvaluator {
public:
    PathEvaluator(const GridMap& map, const RiskConfig& cfg, double r_c)
        : map_(map), cfg_(cfg), r_c_(r_c) {
        cfg_.validate();
    }

    const GridMap& map() const { return map_; }
    const RiskConfig& cfg() const { return cfg_; }
    double feasibility_radius() const { return r_c_; }

    double locale_log_survival(const State& s) {
        int64_t k = (static_cast<int64_t>(s.k) * map_.ny() + s.j) * map_.nx() + s.i;
        auto it = locale_cache_.find(k);
        if (it != locale_cache_.end()) return it->second;
        double log_s = 0.0;
        if (cfg_.uses(RiskElement::Distance)) log_s += std::log1p(-distance_risk(map_, s, cfg_));
        if (cfg_.uses(RiskElement::Visibility))
            log_s += std::log1p(-visibility_risk(visibility(map_, s, cfg_.n_rays), cfg_));
        if (cfg_.uses(RiskElement::Scale)) log_s += std::log1p(-scale_risk(map_, s, cfg_));
        if (cfg_.uses(RiskElement::Singularity))
            log_s += std::log1p(-singularity_risk(map_, s, cfg_));
        locale_cache_.emplace(k, log_s);
        return log_s;
    }

    // Full-path evaluation; mathematically identical to risk::path_risk.
    double evaluate(const std::vector<State>& path) {
        ++evaluations_;
        double log_s = 0.0;
        for (size_t i = 0; i < path.size(); ++i) {
            log_s += locale_log_survival(path[i]);
            if (cfg_.uses(RiskElement::ActionLength) && i >= 1)
                log_s += std::log1p(-action_length_risk(path[i - 1], path[i], cfg_));
            if (cfg_.uses(RiskElement::Turn) && i >= 2)
                log_s += std::log1p(-turn_risk(path[i - 2], path[i - 1], path[i], cfg_));
        }
        if (cfg_.uses_tether_trace()) {
            MotionPlan mp = plan_contacts(map_, path, map_.tether_origin());
            for (size_t i = 0; i < path.size(); ++i) {
                if (cfg_.uses(RiskElement::TetherLength))
                    log_s += std::log1p(-tether_length_risk(mp.steps[i].total_length, cfg_));
                if (cfg_.uses(RiskElement::ContactCount))
                    log_s += std::log1p(-contact_count_risk(mp.steps[i].contact_count, cfg_));
            }
        }
        return -std::expm1(log_s);
    }

    size_t evaluations() const { return evaluations_; }

private:
    const GridMap& map_;
    RiskConfig cfg_;
    double r_c_;
    std::map<int64_t, double> locale_cache_;
    size_t evaluations_ = 0;
};

// Incremental DFS state for the exact planner: log-survival and tether
// state evolve on extension and are restored from snapshots on retraction.
class IncrementalPath {
public:
    IncrementalPath(PathEvaluator& eval, const State& start)
        : eval_(eval), tether_(eval.map().tether_origin()) {
        path_.push_back(start);
        on_path_.insert(pack(start));
        log_survival_.push_back(state_log_survival(0));
        if (traverse()) {
            tether_snapshots_.push_back(tether_);
            advance_tether(eval_.map().cell_center(start));
            log_survival_.back() += tether_log_survival();
        }
    }

    const std::vector<State>& path() const { return path_; }
    bool contains(const State& s) const { return on_path_.count(pack(s)) != 0; }
    double risk() const { return -std::expm1(total_log_survival()); }
    double total_log_survival() const {
        double t = 0.0;
        for (double v : log_survival_) t += v;
        return t;
    }

    // Throws PlanningError (state unchanged) when the tether wrap cannot be
    // resolved for the extension; such paths are treated as infeasible.
    void extend(const State& s) {
        path_.push_back(s);
        double log_s = state_log_survival(path_.size() - 1);
        if (traverse()) {
            TetherState snapshot = tether_;
            Vec3 saved_prev = prev_wp_;
            try {
                advance_tether(eval_.map().cell_center(s));
            } catch (...) {
                tether_ = snapshot;
                prev_wp_ = saved_prev;
                path_.pop_back();
                throw;
            }
            tether_snapshots_.push_back(std::move(snapshot));
            log_s += tether_log_survival();
        }
        on_path_.insert(pack(s));
        log_survival_.push_back(log_s);
    }

    void retract() {
        if (path_.size() <= 1) throw std::logic_error("cannot retract the start state");
        on_path_.erase(pack(path_.back()));
        path_.pop_back();
        log_survival_.pop_back();
        if (traverse()) {
            tether_ = tether_snapshots_.back();
            tether_snapshots_.pop_back();
        }
    }

private:
    bool traverse() const { return eval_.cfg().uses_tether_trace(); }
    int64_t pack(const State& s) const {
        return (static_cast<int64_t>(s.k) * eval_.map().ny() + s.j) * eval_.map().nx() + s.i;
    }

    double state_log_survival(size_t i) {
        const RiskConfig& cfg = eval_.cfg();
        double log_s = eval_.locale_log_survival(path_[i]);
        if (cfg.uses(RiskElement::ActionLength) && i >= 1)
            log_s += std::log1p(-action_length_risk(path_[i - 1], path_[i], cfg));
        if (cfg.uses(RiskElement::Turn) && i >= 2)
            log_s += std::log1p(-turn_risk(path_[i - 2], path_[i - 1], path_[i], cfg));
        return log_s;
    }

    // One step of the contact planning algorithm, applied to the newly
    // appended waypoint.
    void advance_tether(const Vec3& wp) {
        const GridMap& map = eval_.map();
        bool relax = false;
        if (tether_.cp_stack.size() >= 2) {
            const Vec3& last = tether_.cp_stack[tether_.cp_stack.size() - 2];
            if (!segment_blocked(map, last, wp))
                relax = !obstacle_confined(tether_.top(), last, wp, map);
        }
        if (relax) {
            tether_.pop();
        } else if (segment_blocked(map, tether_.top(), wp)) {
            tether_.push(new_contact_point(tether_.top(), prev_wp_, wp, map));
        }
        last_total_length_ = tether_.total_length(wp);
        last_contacts_ = tether_.contact_count();
        prev_wp_ = wp;
    }

    double tether_log_survival() const {
        const RiskConfig& cfg = eval_.cfg();
        double log_s = 0.0;
        if (cfg.uses(RiskElement::TetherLength))
            log_s += std::log1p(-tether_length_risk(last_total_length_, cfg));
        if (cfg.uses(RiskElement::ContactCount))
            log_s += std::log1p(-contact_count_risk(last_contacts_, cfg));
        return log_s;
    }

    PathEvaluator& eval_;
    std::vector<State> path_;
    std::set<int64_t> on_path_;
    std::vector<double> log_survival_;  // per-state contributions
    TetherState tether_;
    std::vector<TetherState> tether_snapshots_;
    Vec3 prev_wp_;
    double last_total_length_ = 0.0;
    int last_contacts_ = 0;
};

struct VertexIndex {
    std::vector<State> cells;
    std::map<int64_t, int> index;

    static VertexIndex build(const GridMap& map) {
        VertexIndex out;
        for (int k = 0; k < map.nz(); ++k)
            for (int j = 0; j < map.ny(); ++j)
                for (int i = 0; i < map.nx(); ++i) {
                    State s{i, j, k};
                    if (!map.occupied(s)) {
                        out.index[out.pack(map, s)] = static_cast<int>(out.cells.size());
                        out.cells.push_back(s);
                    }
                }
        return out;
    }
    int64_t pack(const GridMap& map, const State& s) const {
        return (static_cast<int64_t>(s.k) * map.ny() + s.j) * map.nx() + s.i;
    }
    int at(const GridMap& map, const State& s) const {
        auto it = index.find(pack(map, s));
        return it == index.end() ? -1 : it->second;
    }
};

}  // namespace detail

// Exhaustive enumeration of all simple paths from the start. The visitor
// receives every enumerated path with its risk, reward and utility.
template <typename Visitor>
void enumerate_simple_paths(const GridMap& map, const RiskConfig& cfg, const GraphConfig& gcfg,
                            const RewardConfig& rcfg, const PlanLimits& limits, PlanStats& stats,
                            Visitor&& visit) {
    gcfg.validate(map.nz());
    rcfg.validate();
    size_t free_count = map.free_cell_count();
    if (free_count > limits.max_vertices)
        throw BudgetError("exact planner refused: " + std::to_string(free_count) +
                          " free vertices exceed the budget of " +
                          std::to_string(limits.max_vertices));

    detail::PathEvaluator eval(map, cfg, gcfg.r_c);
    detail::IncrementalPath inc(eval, map.start());
    const auto& offsets = connectivity_offsets(gcfg.connectivity);

    // The unit path (staying at start) is a candidate too.
    visit(inc.path(), inc.risk(), 0.0);
    ++stats.paths_seen;

    double current_reward = 0.0;
    auto dfs = [&](auto&& self, const State& u) -> void {
        ++stats.expansions;
        for (const State& d : offsets) {
            State v{u.i + d.i, u.j + d.j, u.k + d.k};
            if (!map.free(v) || inc.contains(v)) continue;
            try {
                inc.extend(v);
            } catch (const PlanningError&) {
                continue;  // unresolvable tether wrap: extension infeasible
            }
            double saved_reward = current_reward;
            current_reward = rcfg.gamma * current_reward + map.reward(v);
            if (++stats.paths_seen > limits.max_paths)
                throw BudgetError("exact planner refused: more than " +
                                  std::to_string(limits.max_paths) + " simple paths");
            visit(inc.path(), inc.risk(), current_reward);
            self(self, v);
            inc.retract();
            current_reward = saved_reward;
        }
    };
    dfs(dfs, map.start());
    stats.evaluations = eval.evaluations();
}

// Max-utility path over all simple paths (exact, budget-guarded).
inline PlanResult plan_exact(const GridMap& map, const RiskConfig& cfg, const GraphConfig& gcfg,
                             const RewardConfig& rcfg, const PlanLimits& limits = {}) {
    if (rcfg.gamma == 0.0)
        throw std::invalid_argument("exact mode requires gamma > 0 (reward restore is 1/gamma)");
    auto t0 = std::chrono::steady_clock::now();
    PlanResult out;
    VertexPlan best;
    bool have = false;
    enumerate_simple_paths(map, cfg, gcfg, rcfg, limits, out.stats,
                           [&](const std::vector<State>& path, double risk, double reward) {
                               double utility = reward / std::max(risk, kUtilityEpsilon);
                               bool better = false;
                               if (!have) {
                                   better = true;
                               } else if (utility != best.utility) {
                                   better = utility > best.utility;
                               } else {
                                   better = path_order_less(risk, path, best.risk, best.path);
                               }
                               if (better) {
                                   best = {path.back(), path, risk, reward, utility, true};
                                   have = true;
                               }
                           });
    out.chosen = best;
    out.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Per-vertex minimum risk over all simple paths (the exact planner in
// risk-only mode; also the oracle for the directional search).
inline PlanResult exhaustive_min_risk(const GridMap& map, const RiskConfig& cfg,
                                      const GraphConfig& gcfg, const PlanLimits& limits = {}) {
    auto t0 = std::chrono::steady_clock::now();
    PlanResult out;
    detail::VertexIndex verts = detail::VertexIndex::build(map);
    out.per_vertex.resize(verts.cells.size());
    for (size_t i = 0; i < verts.cells.size(); ++i) out.per_vertex[i].vertex = verts.cells[i];
    RewardConfig rcfg;
    enumerate_simple_paths(map, cfg, gcfg, rcfg, limits, out.stats,
                           [&](const std::vector<State>& path, double risk, double) {
                               VertexPlan& vp = out.per_vertex[verts.at(map, path.back())];
                               if (!vp.reachable ||
                                   path_order_less(risk, path, vp.risk, vp.path)) {
                                   vp.path = path;
                                   vp.risk = risk;
                                   vp.reachable = true;
                               }
                           });
    out.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// --- directional-component search ------------------------------------------

// Search node: a vertex plus the identifiers of the incoming directions of
// its last (lookback - 1) steps. kSelfDirection marks "no predecessor".
inline constexpr int kSelfDirection = -1;
inline constexpr int kMaxLookback = 4;

struct DirectionalComponent {
    int vertex = -1;
    std::array<int, kMaxLookback - 1> history{};  // most recent direction last
    double risk = std::numeric_limits<double>::infinity();
    int predecessor = -1;  // index into the component arena, -1 at the start
    bool closed = false;
};

struct RiskAwareResult {
    PlanResult plan;
    std::vector<DirectionalComponent> components;  // final arena, for inspection
    std::vector<double> closing_risks;             // risks in closing order
};

// Start-rooted path of a component, following predecessor links.
inline std::vector<State> backtrack(const std::vector<DirectionalComponent>& arena,
                                    int component, const std::vector<State>& cells) {
    if (component < 0) throw std::invalid_argument("backtrack: invalid component");
    if (!std::isfinite(arena[component].risk))
        throw std::invalid_argument("backtrack: component is unreached (sentinel risk)");
    std::vector<State> path;
    for (int c = component; c != -1; c = arena[c].predecessor)
        path.push_back(cells[arena[c].vertex]);
    std::reverse(path.begin(), path.end());
    return path;
}

// Minimum-risk path to every vertex via directional components with dynamic
// full-path re-evaluation. Risk aggregation happens in log-complement space
// inside the evaluator; extensions that would revisit a path state are
// skipped so stored paths stay simple.
inline RiskAwareResult plan_risk_aware_full(const GridMap& map, const RiskConfig& cfg,
                                            const GraphConfig& gcfg, int lookback = 2) {
    gcfg.validate(map.nz());
    if (lookback < 1 || lookback > kMaxLookback)
        throw std::invalid_argument("lookback must lie in [1, " + std::to_string(kMaxLookback) +
                                    "]");
    if (!map.free(map.start())) throw std::invalid_argument("start must be free");
    auto t0 = std::chrono::steady_clock::now();

    detail::PathEvaluator eval(map, cfg, gcfg.r_c);
    detail::VertexIndex verts = detail::VertexIndex::build(map);
    const auto& offsets = connectivity_offsets(gcfg.connectivity);
    const int hist_len = lookback - 1;

    RiskAwareResult out;
    auto& arena = out.components;
    // (vertex, history) -> arena slot; components are created on first reach,
    // so only geometrically realizable histories exist.
    std::map<std::pair<int, std::array<int, kMaxLookback - 1>>, int> slot_of;
    auto slot = [&](int vertex, const std::array<int, kMaxLookback - 1>& hist) {
        auto key = std::make_pair(vertex, hist);
        auto it = slot_of.find(key);
        if (it != slot_of.end()) return it->second;
        DirectionalComponent c;
        c.vertex = vertex;
        c.history = hist;
        arena.push_back(c);
        int idx = static_cast<int>(arena.size()) - 1;
        slot_of.emplace(key, idx);
        return idx;
    };

    // Ordered by (risk, vertex, history) for deterministic closing.
    using QueueKey = std::tuple<double, int, std::array<int, kMaxLookback - 1>>;
    std::set<std::pair<QueueKey, int>> open;

    std::array<int, kMaxLookback - 1> self_hist;
    self_hist.fill(kSelfDirection);
    int start_idx = verts.at(map, map.start());
    int start_slot = slot(start_idx, self_hist);
    // The start component carries the start state's own risk so that every
    // stored risk equals the evaluation of its backtracked path.
    arena[start_slot].risk = eval.evaluate({map.start()});
    open.insert({{arena[start_slot].risk, start_idx, self_hist}, start_slot});

    while (!open.empty()) {
        auto [key, cur] = *open.begin();
        open.erase(open.begin());
        if (arena[cur].closed) continue;
        arena[cur].closed = true;
        out.closing_risks.push_back(arena[cur].risk);
        ++out.plan.stats.expansions;

        std::vector<State> base_path = backtrack(arena, cur, verts.cells);
        const State u = verts.cells[arena[cur].vertex];
        for (int d = 0; d < static_cast<int>(offsets.size()); ++d) {
            State v{u.i + offsets[d].i, u.j + offsets[d].j, u.k + offsets[d].k};
            if (!map.free(v)) continue;
            if (std::find(base_path.begin(), base_path.end(), v) != base_path.end()) continue;
            base_path.push_back(v);
            double risk;
            try {
                risk = eval.evaluate(base_path);
            } catch (const PlanningError&) {
                base_path.pop_back();
                continue;  // unresolvable tether wrap: extension infeasible
            }
            base_path.pop_back();

            std::array<int, kMaxLookback - 1> hist = self_hist;
            if (hist_len > 0) {
                for (int h = 0; h + 1 < hist_len; ++h) hist[h] = arena[cur].history[h + 1];
                hist[hist_len - 1] = d;
            }
            int nxt = slot(verts.at(map, v), hist);
            if (!arena[nxt].closed && risk < arena[nxt].risk) {
                if (std::isfinite(arena[nxt].risk))
                    open.erase({{arena[nxt].risk, arena[nxt].vertex, arena[nxt].history}, nxt});
                arena[nxt].risk = risk;
                arena[nxt].predecessor = cur;
                open.insert({{risk, arena[nxt].vertex, arena[nxt].history}, nxt});
            }
        }
    }

    // Per vertex, pick the best closed component under the deterministic
    // path order and report its independently re-evaluated risk.
    out.plan.per_vertex.resize(verts.cells.size());
    std::vector<int> best_slot(verts.cells.size(), -1);
    for (size_t c = 0; c < arena.size(); ++c) {
        if (!std::isfinite(arena[c].risk)) continue;
        int v = arena[c].vertex;
        if (best_slot[v] == -1) {
            best_slot[v] = static_cast<int>(c);
            continue;
        }
        std::vector<State> pa = backtrack(arena, static_cast<int>(c), verts.cells);
        std::vector<State> pb = backtrack(arena, best_slot[v], verts.cells);
        if (path_order_less(arena[c].risk, pa, arena[best_slot[v]].risk, pb))
            best_slot[v] = static_cast<int>(c);
    }
    for (size_t v = 0; v < verts.cells.size(); ++v) {
        VertexPlan& vp = out.plan.per_vertex[v];
        vp.vertex = verts.cells[v];
        if (best_slot[v] != -1) {
            vp.path = backtrack(arena, best_slot[v], verts.cells);
            vp.risk = arena[best_slot[v]].risk;
            vp.reachable = true;
        }
    }
    out.plan.stats.evaluations = eval.evaluations();
    out.plan.stats.lookback = lookback;
    out.plan.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline PlanResult plan_risk_aware(const GridMap& map, const RiskConfig& cfg,
                                  const GraphConfig& gcfg, int lookback = 2) {
    return plan_risk_aware_full(map, cfg, gcfg, lookback).plan;
}

// Lower-stage reward maximizer: utility = reward / max(risk, epsilon) over
// the ensemble, including the stay-at-start unit path (the start vertex's
// own entry).
inline PlanResult select_max_utility(const PlanResult& ensemble, const GridMap& map,
                                     const RewardConfig& rcfg) {
    rcfg.validate();
    PlanResult out = ensemble;
    bool have = false;
    VertexPlan best;
    for (VertexPlan& vp : out.per_vertex) {
        if (!vp.reachable) continue;
        vp.reward = collected_reward(map, vp.path, rcfg.gamma);
        vp.utility = vp.reward / std::max(vp.risk, kUtilityEpsilon);
        bool better = false;
        if (!have) {
            better = true;
        } else if (vp.utility != best.utility) {
            better = vp.utility > best.utility;
        } else {
            better = path_order_less(vp.risk, vp.path, best.risk, best.path);
        }
        if (better) {
            best = vp;
            have = true;
        }
    }
    if (!have) throw PlanningError("select_max_utility: empty ensemble");
    out.chosen = best;
    return out;
}

// Conventional comparator: additive per-state cost from the normalized
// equal-weight sum of the distance and visibility risks, minimized with a
// plain Dijkstra. Reported risks re-evaluate the found paths under the full
// probabilistic model so the two planners are comparable.
inline PlanResult plan_additive_baseline(const GridMap& map, const RiskConfig& cfg,
                                         const GraphConfig& gcfg) {
    gcfg.validate(map.nz());
    auto t0 = std::chrono::steady_clock::now();
    detail::VertexIndex verts = detail::VertexIndex::build(map);
    const auto& offsets = connectivity_offsets(gcfg.connectivity);

    auto state_cost = [&](const State& s) {
        double d = distance_risk(map, s, cfg);
        double v = visibility_risk(visibility(map, s, cfg.n_rays), cfg);
        return 0.5 * (d + v);
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(verts.cells.size(), inf);
    std::vector<int> pred(verts.cells.size(), -1);
    int start = verts.at(map, map.start());
    dist[start] = state_cost(map.start());
    std::set<std::pair<double, int>> open{{dist[start], start}};
    while (!open.empty()) {
        auto [cost, u] = *open.begin();
        open.erase(open.begin());
        State us = verts.cells[u];
        for (const State& d : offsets) {
            State vs{us.i + d.i, us.j + d.j, us.k + d.k};
            if (!map.free(vs)) continue;
            int v = verts.at(map, vs);
            double cand = cost + state_cost(vs);
            if (cand < dist[v]) {
                if (std::isfinite(dist[v])) open.erase({dist[v], v});
                dist[v] = cand;
                pred[v] = u;
                open.insert({cand, v});
            }
        }
    }

    PlanResult out;
    out.per_vertex.resize(verts.cells.size());
    for (size_t v = 0; v < verts.cells.size(); ++v) {
        VertexPlan& vp = out.per_vertex[v];
        vp.vertex = verts.cells[v];
        if (!std::isfinite(dist[v])) continue;
        std::vector<State> path;
        for (int c = static_cast<int>(v); c != -1; c = pred[c]) path.push_back(verts.cells[c]);
        std::reverse(path.begin(), path.end());
        vp.path = path;
        vp.risk = path_risk_auto(map, path, cfg, gcfg.r_c).path_risk;
        vp.additive_cost = dist[v];
        vp.reachable = true;
    }
    out.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace tuav
