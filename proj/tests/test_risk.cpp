#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tuav/io.hpp"
#include "tuav/risk.hpp"

using namespace tuav;

namespace {

std::string fixture(const std::string& name) {
    return std::string(TUAV_FIXTURES_DIR) + "/" + name;
}

struct Ch3Fixture {
    GridMap map = load_map(fixture("ch3_map.json"));
    RiskConfig cfg = load_risk_config(fixture("ch3_risk.json"));
    std::vector<State> path = load_path(fixture("ch3_path.json"));
};

// Dense ray-march visibility oracle (step resolution/100).
double visibility_oracle(const GridMap& map, const State& s, int n_rays) {
    Vec3 c = map.cell_center(s);
    double sum = 0.0;
    for (const Vec3& d : isovist_directions(n_rays, map.planar())) {
        double t = 0.0, step = map.resolution() / 100.0;
        while (true) {
            Vec3 p = c + d * (t + step);
            if (!map.point_in_bounds(p) || map.point_occupied(p)) break;
            t += step;
        }
        sum += t;
    }
    return sum / n_rays;
}

}  // namespace

TEST_CASE("distance risk saturates, calibrates and depends on clearance only") {
    Ch3Fixture f;
    // far from everything -> floor
    GridMap empty(40, 40, 1, 1.0);
    empty.set_start({20, 20, 0});
    RiskConfig cfg = f.cfg;
    CHECK(distance_risk(empty, {20, 20, 0}, cfg) == cfg.p_floor);
    // the worked-example state next to the central obstacle
    CHECK(distance_risk(f.map, {5, 7, 0}, f.cfg) == Catch::Approx(0.04));
    // equal clearance -> equal risk
    CHECK(distance_risk(f.map, {5, 7, 0}, f.cfg) ==
          Catch::Approx(distance_risk(f.map, {4, 6, 0}, f.cfg)));
    CHECK_THROWS_AS(distance_risk(f.map, {5, 6, 0}, f.cfg), std::invalid_argument);
}

TEST_CASE("piecewise map validation") {
    PiecewiseLinearMap bad{{{0.0, 0.1}, {1.0, 0.2}}};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    PiecewiseLinearMap good{{{0.5, 0.2}, {1.0, 0.1}, {2.0, 0.0}}};
    good.validate();
    CHECK(good(0.1) == Catch::Approx(0.2));   // below first knot
    CHECK(good(0.75) == Catch::Approx(0.15)); // interpolated
    CHECK(good(5.0) == Catch::Approx(0.0));   // beyond last knot
}

TEST_CASE("visibility in an empty square room") {
    // 21x21 room, resolution 1: the center sees 10.5 m along the axes.
    GridMap room(21, 21, 1, 1.0);
    room.set_start({10, 10, 0});
    double v4 = visibility(room, {10, 10, 0}, 4);
    CHECK(v4 == Catch::Approx(10.5).epsilon(1e-3));
    // 8 rays: 4 axis rays at w, 4 diagonals at w*sqrt(2)
    double v8 = visibility(room, {10, 10, 0}, 8);
    CHECK(v8 == Catch::Approx((4 * 10.5 + 4 * 10.5 * std::sqrt(2.0)) / 8.0).epsilon(1e-3));
    // dense-sampled oracle within 1%
    CHECK(v8 == Catch::Approx(visibility_oracle(room, {10, 10, 0}, 8)).epsilon(0.01));
}

TEST_CASE("corridor visibility is dominated by open space") {
    GridMap corr(11, 3, 1, 1.0);
    for (int i = 0; i < 11; ++i) {
        corr.set_occupied({i, 0, 0});
        corr.set_occupied({i, 2, 0});
    }
    corr.set_start({5, 1, 0});
    GridMap open(11, 11, 1, 1.0);
    open.set_start({5, 5, 0});
    CHECK(visibility(corr, {5, 1, 0}, 16) < visibility(open, {5, 5, 0}, 16));
}

TEST_CASE("visibility risk mapping") {
    RiskConfig cfg;
    cfg.v_safe = 5.0;
    cfg.r_max_vis = 0.1;
    CHECK(visibility_risk(6.0, cfg) == cfg.p_floor);
    CHECK(visibility_risk(0.0, cfg) == Catch::Approx(std::min(cfg.r_max_vis, cfg.p_cap)));
    CHECK(visibility_risk(2.5, cfg) == Catch::Approx(0.05));
    CHECK_THROWS_AS(visibility_risk(-1.0, cfg), std::invalid_argument);
}

TEST_CASE("scale risk bands") {
    RiskConfig cfg;
    cfg.agent_cd = 2.0;
    cfg.n_rays = 16;
    cfg.p_granular = 0.2;
    cfg.p_restricted = 0.05;

    GridMap open(41, 41, 1, 1.0);
    open.set_start({20, 20, 0});
    CHECK(scale_risk(open, {20, 20, 0}, cfg) == cfg.p_floor);

    // Corridor of width exactly A_cd (two cells at resolution 1... use
    // agent_cd = corridor width): E_cd/A_cd = 1 -> granular band.
    GridMap narrow(15, 4, 1, 1.0);
    for (int i = 0; i < 15; ++i) {
        narrow.set_occupied({i, 0, 0});
        narrow.set_occupied({i, 3, 0});
    }
    narrow.set_start({7, 1, 0});
    // opposing vertical rays: 0.5 up + 1.5 down = 2.0 = A_cd
    CHECK(environment_cd(narrow, {7, 1, 0}, 16) == Catch::Approx(2.0).epsilon(1e-3));
    CHECK(scale_risk(narrow, {7, 1, 0}, cfg) == Catch::Approx(0.2));

    // Corridor of width 1.5 * A_cd -> restricted band.
    cfg.agent_cd = 4.0 / 3.0;
    CHECK(scale_risk(narrow, {7, 1, 0}, cfg) == Catch::Approx(0.05));
}

TEST_CASE("singularity risk ramps toward the vertical") {
    RiskConfig cfg;
    cfg.singularity_band = deg2rad(10.0);
    cfg.r_max_sing = 0.2;
    Vec3 reel{0, 0, 0};
    CHECK(singularity_risk({5.0, 0.0, 0.0}, reel, cfg) == cfg.p_floor);  // elevation 0
    CHECK(singularity_risk({0.0, 5.0, 0.0}, reel, cfg) == Catch::Approx(0.2));  // 90 deg
    double mid = singularity_risk({5.0 * std::cos(deg2rad(85)), 5.0 * std::sin(deg2rad(85)), 0.0},
                                  reel, cfg);
    CHECK(mid > cfg.p_floor);
    CHECK(mid < cfg.r_max_sing);
    // monotone within the band
    double lo = singularity_risk({std::cos(deg2rad(82)), std::sin(deg2rad(82)), 0.0}, reel, cfg);
    double hi = singularity_risk({std::cos(deg2rad(88)), std::sin(deg2rad(88)), 0.0}, reel, cfg);
    CHECK(lo < hi);
}

TEST_CASE("action length risk") {
    RiskConfig cfg;
    cfg.action_coeff = 0.04;
    CHECK(action_length_risk({0, 0, 0}, {1, 0, 0}, cfg) == Catch::Approx(0.04));
    CHECK(action_length_risk({0, 0, 0}, {1, 1, 0}, cfg) ==
          Catch::Approx(0.04 * std::sqrt(2.0)));
}

TEST_CASE("turn risk: collinear, right angle, reversal") {
    RiskConfig cfg;
    cfg.turn_coeff = 0.04 / std::sqrt(2.0);
    CHECK(turn_risk({0, 0, 0}, {1, 0, 0}, {2, 0, 0}, cfg) == 0.0);
    CHECK(turn_risk({0, 0, 0}, {1, 0, 0}, {1, 1, 0}, cfg) == Catch::Approx(0.04));
    // reversal: ||a_i - a_{i-1}|| = 2
    CHECK(turn_risk({0, 0, 0}, {1, 0, 0}, {0, 0, 0}, cfg) ==
          Catch::Approx(2.0 * cfg.turn_coeff));
}

TEST_CASE("tether length risk is linear with clamp") {
    RiskConfig cfg;
    cfg.tether_coeff = 0.005;
    CHECK(tether_length_risk(0.0, cfg) == 0.0);
    CHECK(tether_length_risk(4.0, cfg) == Catch::Approx(0.02));
    CHECK(tether_length_risk(8.0, cfg) == Catch::Approx(2.0 * tether_length_risk(4.0, cfg)));
    // calibration band: lengths 2..8 m map into 0.01..0.04
    CHECK(tether_length_risk(2.0, cfg) == Catch::Approx(0.01));
    CHECK(tether_length_risk(8.0, cfg) == Catch::Approx(0.04));
    cfg.p_cap = 0.03;
    CHECK(tether_length_risk(100.0, cfg) == Catch::Approx(0.03));
    CHECK_THROWS_AS(tether_length_risk(-1.0, cfg), std::invalid_argument);
}

TEST_CASE("contact count risk composes independently") {
    RiskConfig cfg;
    cfg.contact_prob = 0.03;
    CHECK(contact_count_risk(0, cfg) == 0.0);
    CHECK(contact_count_risk(1, cfg) == Catch::Approx(0.03));
    CHECK(contact_count_risk(2, cfg) == Catch::Approx(1.0 - 0.97 * 0.97));
    CHECK(contact_count_risk(2, cfg) == Catch::Approx(0.0591));
}

TEST_CASE("worked example: state finish probabilities and path risk") {
    Ch3Fixture f;
    RiskBreakdown b = path_risk_auto(f.map, f.path, f.cfg);
    REQUIRE(b.states.size() == 12);
    // s_75 is the seventh state: (1-0.04)(1-0.04)(1-0.03)
    CHECK(b.states[6].element[static_cast<int>(RiskElement::Distance)] == Catch::Approx(0.04));
    CHECK(b.states[6].element[static_cast<int>(RiskElement::Turn)] == Catch::Approx(0.04));
    CHECK(b.states[6].element[static_cast<int>(RiskElement::ContactCount)] ==
          Catch::Approx(0.03));
    CHECK(b.states[6].finish_probability == Catch::Approx(0.89).margin(0.005));
    CHECK(b.path_risk == Catch::Approx(0.38).margin(0.005));
    // start state: one 0.01 element
    CHECK(b.states[0].finish_probability == Catch::Approx(0.99));
}

TEST_CASE("single state path with zero-risk elements") {
    GridMap empty(30, 30, 1, 1.0);
    empty.set_start({15, 15, 0});
    RiskConfig cfg;
    cfg.enable(RiskElement::Distance);
    cfg.enable(RiskElement::ActionLength);
    RiskBreakdown b = path_risk(empty, {{15, 15, 0}}, cfg);
    CHECK(b.path_risk == 0.0);
}

TEST_CASE("path risk validation errors") {
    Ch3Fixture f;
    SECTION("occupied state") {
        CHECK_THROWS_AS(path_risk(f.map, {{2, 2, 0}, {5, 6, 0}}, f.cfg, {}, 10.0),
                        std::invalid_argument);
    }
    SECTION("infeasible gap") {
        CHECK_THROWS_AS(path_risk_auto(f.map, {{2, 2, 0}, {9, 9, 0}}, f.cfg),
                        std::invalid_argument);
    }
    SECTION("misaligned tether trace") {
        CHECK_THROWS_AS(path_risk(f.map, f.path, f.cfg, {}), std::invalid_argument);
    }
}

TEST_CASE("double evaluation identity and order invariance") {
    Ch3Fixture f;
    RiskBreakdown b = path_risk_auto(f.map, f.path, f.cfg);
    // recompute 1 - prod prod (1 - r) directly
    double survival = 1.0;
    for (const StateRisk& s : b.states)
        for (double r : s.element) survival *= (1.0 - r);
    CHECK(b.path_risk == Catch::Approx(1.0 - survival).margin(1e-12));
    CHECK(b.path_risk >= 0.0);
    CHECK(b.path_risk <= 1.0);
}

TEST_CASE("appending states is monotone in path risk") {
    Ch3Fixture f;
    double prev = 0.0;
    for (size_t n = 1; n <= f.path.size(); ++n) {
        std::vector<State> prefix(f.path.begin(), f.path.begin() + n);
        double risk = path_risk_auto(f.map, prefix, f.cfg).path_risk;
        CHECK(risk >= prev - 1e-12);
        prev = risk;
    }
    // appending an all-zero-risk state leaves the risk unchanged
    GridMap empty(30, 30, 1, 1.0);
    empty.set_start({3, 3, 0});
    RiskConfig cfg;
    cfg.enable(RiskElement::Distance);
    double one = path_risk(empty, {{3, 3, 0}}, cfg).path_risk;
    double two = path_risk(empty, {{3, 3, 0}, {4, 3, 0}}, cfg).path_risk;
    CHECK(one == Catch::Approx(two).margin(1e-15));
}

TEST_CASE("raising any element risk never decreases path risk") {
    Ch3Fixture f;
    double base = path_risk_auto(f.map, f.path, f.cfg).path_risk;
    RiskConfig harder = f.cfg;
    harder.contact_prob = 0.05;
    CHECK(path_risk_auto(f.map, f.path, harder).path_risk > base);
    harder = f.cfg;
    harder.turn_coeff *= 1.5;
    CHECK(path_risk_auto(f.map, f.path, harder).path_risk > base);
}

TEST_CASE("history dependence: contact counts differ by traverse") {
    // Same final state, different wrap histories around the block fixture.
    GridMap m = load_map(fixture("contact_map.json"));
    RiskConfig cfg;
    cfg.enable(RiskElement::ContactCount);
    std::vector<State> wrap = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0},
                               {3, 1, 0}, {3, 2, 0}, {3, 3, 0}};
    std::vector<State> open = {{0, 0, 0}, {0, 1, 0}, {0, 2, 0}, {0, 3, 0},
                               {1, 3, 0}, {2, 3, 0}, {3, 3, 0}};
    RiskBreakdown rw = path_risk_auto(m, wrap, cfg);
    RiskBreakdown ro = path_risk_auto(m, open, cfg);
    // wrap route carries a contact at the shared final state, open does not
    CHECK(rw.states.back().element[static_cast<int>(RiskElement::ContactCount)] ==
          Catch::Approx(0.03));
    CHECK(ro.states.back().element[static_cast<int>(RiskElement::ContactCount)] == 0.0);
    CHECK(rw.path_risk > ro.path_risk);
}

TEST_CASE("palindromic corridor path has reversal-invariant locale risk") {
    GridMap corr(9, 3, 1, 1.0);
    for (int i = 0; i < 9; ++i) {
        corr.set_occupied({i, 0, 0});
        corr.set_occupied({i, 2, 0});
    }
    corr.set_start({1, 1, 0});
    RiskConfig cfg;
    cfg.enable(RiskElement::Distance);
    cfg.enable(RiskElement::Visibility);
    cfg.distance_map = PiecewiseLinearMap::ramp(2.0, 0.2);
    cfg.v_safe = 4.0;
    cfg.r_max_vis = 0.1;
    std::vector<State> fwd;
    for (int i = 1; i <= 7; ++i) fwd.push_back({i, 1, 0});
    std::vector<State> rev(fwd.rbegin(), fwd.rend());
    CHECK(path_risk(corr, fwd, cfg).path_risk ==
          Catch::Approx(path_risk(corr, rev, cfg).path_risk).margin(1e-12));
}

TEST_CASE("element outputs respect their clamps under randomized inputs") {
    std::mt19937 rng(99);
    RiskConfig cfg;
    cfg.p_floor = 0.0;
    cfg.p_cap = 0.2;
    cfg.action_coeff = 0.15;
    cfg.turn_coeff = 0.12;
    cfg.tether_coeff = 0.08;
    cfg.contact_prob = 0.19;
    std::uniform_int_distribution<int> cell(-6, 6);
    std::uniform_real_distribution<double> len(0.0, 50.0);
    for (int trial = 0; trial < 100000; ++trial) {
        State a{cell(rng), cell(rng), 0}, b{cell(rng), cell(rng), 0},
            c{cell(rng), cell(rng), 0};
        double v1 = action_length_risk(a, b, cfg);
        double v2 = turn_risk(a, b, c, cfg);
        double v3 = tether_length_risk(len(rng), cfg);
        double v4 = contact_count_risk(trial % 40, cfg);
        for (double v : {v1, v2, v3, v4}) {
            CHECK(v >= cfg.p_floor);
            CHECK(v <= cfg.p_cap);
        }
    }
}

TEST_CASE("risk config round trips through json") {
    RiskConfig cfg = load_risk_config(fixture("ch3_risk.json"));
    RiskConfig again = risk_config_from_json(risk_config_to_json(cfg));
    CHECK(risk_config_to_json(again).dump() == risk_config_to_json(cfg).dump());
    CHECK(again.uses(RiskElement::Distance));
    CHECK(again.uses(RiskElement::Turn));
    CHECK(again.uses(RiskElement::ContactCount));
    CHECK_FALSE(again.uses(RiskElement::Visibility));
}
