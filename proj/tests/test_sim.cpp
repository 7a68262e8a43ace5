#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tuav/sim.hpp"
#include "tuav/tether.hpp"

using namespace tuav;

namespace {

// Free-tether motion plan through the given waypoints (contact = origin).
MotionPlan free_plan(const Vec3& origin, const std::vector<Vec3>& wps) {
    MotionPlan plan;
    plan.origin = origin;
    for (const Vec3& w : wps) {
        PlanStep s;
        s.waypoint = w;
        s.contact = origin;
        s.total_length = distance(w, origin);
        plan.steps.push_back(s);
    }
    return plan;
}

GridMap open_map() {
    GridMap m(1, 1, 1, 40.0);  // one huge free cell so nothing collides
    m.set_start({0, 0, 0});
    return m;
}

Mat3 jacobian_fd(const PolarCoord& p, double h = 1e-6) {
    auto f = [&](double l, double t, double a) {
        return polar_to_cartesian({l, t, a});
    };
    Vec3 dL = (f(p.length + h, p.elevation, p.azimuth) -
               f(p.length - h, p.elevation, p.azimuth)) / (2 * h);
    Vec3 dT = (f(p.length, p.elevation + h, p.azimuth) -
               f(p.length, p.elevation - h, p.azimuth)) / (2 * h);
    Vec3 dA = (f(p.length, p.elevation, p.azimuth + h) -
               f(p.length, p.elevation, p.azimuth - h)) / (2 * h);
    Mat3 j;
    for (int r = 0; r < 3; ++r) {
        j(r, 0) = r == 0 ? dL.x : r == 1 ? dL.y : dL.z;
        j(r, 1) = r == 0 ? dT.x : r == 1 ? dT.y : dT.z;
        j(r, 2) = r == 0 ? dA.x : r == 1 ? dA.y : dA.z;
    }
    return j;
}

}  // namespace

TEST_CASE("position step equilibrium and proportional law") {
    ControllerGains g;
    g.kp_length = 0.5;
    g.kd_length = 0.0;
    PolarError prev;
    PolarCoord at{2.0, 0.3, 0.1};
    ControlCommand u = position_step(at, at, g, prev, 0.02);
    CHECK(u.d_length == 0.0);
    CHECK(u.d_elevation == 0.0);
    CHECK(u.d_azimuth == 0.0);

    PolarCoord want{3.0, 0.3, 0.1};
    u = position_step(at, want, g, prev, 0.02);
    CHECK(u.d_length == Catch::Approx(0.5));
}

TEST_CASE("azimuth error wraps to the short way around") {
    ControllerGains g;
    g.kp_azimuth = 1.0;
    g.kd_azimuth = 0.0;
    PolarError prev;
    PolarCoord sensed{1.0, 0.0, deg2rad(175.0)};
    PolarCoord want{1.0, 0.0, deg2rad(-175.0)};  // +350 deg raw, -10 deg wrapped...
    ControlCommand u = position_step(sensed, want, g, prev, 0.02,
                                     nullptr, ActuatorLimits{10, 10, 10});
    CHECK(u.d_azimuth == Catch::Approx(deg2rad(10.0)).margin(1e-9));
    CHECK(u.d_azimuth > 0.0);
    // and the opposite direction wraps negative
    u = position_step(want, sensed, g, prev, 0.02, nullptr, ActuatorLimits{10, 10, 10});
    CHECK(u.d_azimuth == Catch::Approx(-deg2rad(10.0)).margin(1e-9));
}

TEST_CASE("jacobian at the reference configuration") {
    Mat3 j = jacobian({1.0, 0.0, 0.0});
    CHECK(j(0, 0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(j(0, 2) == Catch::Approx(1.0));
    CHECK(j(1, 1) == Catch::Approx(1.0));
    CHECK(j(2, 0) == Catch::Approx(1.0));
    CHECK(std::abs(j.det()) == Catch::Approx(1.0));
}

TEST_CASE("jacobian loses rank at 90 degrees elevation") {
    Mat3 j = jacobian({2.0, kPi / 2.0, 0.7});
    CHECK(j.det() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("jacobian matches central finite differences") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> ul(0.5, 10.0);
    std::uniform_real_distribution<double> ut(-deg2rad(79.9), deg2rad(79.9));
    std::uniform_real_distribution<double> up(-kPi, kPi);
    for (int trial = 0; trial < 1000; ++trial) {
        PolarCoord p{ul(rng), ut(rng), up(rng)};
        Mat3 a = jacobian(p);
        Mat3 fd = jacobian_fd(p);
        for (int i = 0; i < 9; ++i) {
            double scale = std::max(1.0, std::abs(a.m[i]));
            CHECK(std::abs(a.m[i] - fd.m[i]) / scale < 1e-6);
        }
    }
}

TEST_CASE("velocity step solves the inverse kinematics") {
    ControllerGains g;
    g.speed = 1.0;
    SimConfig cfg;
    // at (L=1, theta=0, phi=0) the position is (0,0,1); straight up means +y
    Vec3 current = polar_to_cartesian({1.0, 0.0, 0.0});
    Vec3 target = current + Vec3{0.0, 1.0, 0.0};
    ControlCommand u = velocity_step(current, target, {1.0, 0.0, 0.0}, g, cfg);
    CHECK(u.d_length == Catch::Approx(0.0).margin(1e-12));
    CHECK(u.d_elevation == Catch::Approx(1.0));
    CHECK(u.d_azimuth == Catch::Approx(0.0).margin(1e-12));

    // target == current commands nothing
    u = velocity_step(current, current, {1.0, 0.0, 0.0}, g, cfg);
    CHECK(u.d_length == 0.0);
    CHECK(u.d_elevation == 0.0);

    CHECK_THROWS_AS(velocity_step(current, target, {1.0, deg2rad(89.9), 0.0}, g, cfg),
                    std::domain_error);
}

TEST_CASE("zero commands leave the integrator at a fixed point") {
    GridMap m = open_map();
    MotionPlan plan = free_plan({20.0, 0.5, 20.0}, {{22.0, 2.0, 22.0}});
    ControllerGains g;
    g.kp_length = g.kp_elevation = g.kp_azimuth = 0.0;
    g.kd_length = g.kd_elevation = g.kd_azimuth = 0.0;
    SimConfig cfg;
    cfg.max_steps_per_waypoint = 50;
    // start exactly at the only waypoint: accepted immediately, no motion
    Trace t = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    CHECK(t.status == SimStatus::Completed);
    for (const TraceSample& s : t.samples)
        CHECK(distance(s.position, plan.steps[0].waypoint) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("dense straight line completes under position control") {
    GridMap m = open_map();
    Vec3 origin{20.0, 0.5, 20.0};
    std::vector<Vec3> corners = {{22.0, 1.5, 20.0}, {26.0, 1.5, 20.0}};
    MotionPlan plan = free_plan(origin, densify_polyline(corners, 0.2));
    ControllerGains g;
    SimConfig cfg;
    Trace t = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    CHECK(t.status == SimStatus::Completed);
    CrossTrackStats xt = cross_track_error(t, {corners[0], corners[1]});
    CHECK(xt.max < g.acceptance_radius + 0.2);
}

TEST_CASE("velocity control is straighter than position control on a sparse L") {
    GridMap m = open_map();
    Vec3 origin{20.0, 0.5, 20.0};
    std::vector<Vec3> wps = {{23.0, 1.5, 20.0}, {23.0, 1.5, 24.0}, {26.0, 1.5, 24.0}};
    MotionPlan plan = free_plan(origin, wps);
    ControllerGains g;
    SimConfig cfg;
    Trace tp = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    Trace tv = execute_plan(plan, ControllerKind::Velocity, g, cfg, m);
    REQUIRE(tp.status == SimStatus::Completed);
    REQUIRE(tv.status == SimStatus::Completed);
    CHECK(cross_track_error(tv, wps).mean < cross_track_error(tp, wps).mean);
}

TEST_CASE("velocity mode beats position mode on at least 90 percent of sparse L seeds") {
    GridMap m = open_map();
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> leg(2.0, 4.0);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    int wins = 0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        Vec3 origin{20.0, 0.5, 20.0};
        double a = ang(rng);
        Vec3 p0 = origin + Vec3{3.0 * std::sin(a), 1.0, 3.0 * std::cos(a)};
        double a2 = a + kPi / 2.0;
        Vec3 p1 = p0 + Vec3{leg(rng) * std::sin(a2), 0.0, leg(rng) * std::cos(a2)};
        Vec3 p2 = p1 + Vec3{leg(rng) * std::sin(a), 0.6, leg(rng) * std::cos(a)};
        MotionPlan plan = free_plan(origin, {p0, p1, p2});
        ControllerGains g;
        SimConfig cfg;
        Trace tp = execute_plan(plan, ControllerKind::Position, g, cfg, m);
        Trace tv = execute_plan(plan, ControllerKind::Velocity, g, cfg, m);
        if (tp.status != SimStatus::Completed || tv.status != SimStatus::Completed) continue;
        std::vector<Vec3> ideal = {p0, p1, p2};
        if (cross_track_error(tv, ideal).mean <= cross_track_error(tp, ideal).mean) ++wins;
    }
    CHECK(wins >= seeds * 9 / 10);
}

TEST_CASE("position-mode accuracy improves with waypoint density over the reel") {
    GridMap m = open_map();
    Vec3 origin{20.0, 0.5, 20.0};
    // horizontal diagonal passing directly above the reel
    Vec3 a{17.0, 2.5, 17.0}, b{23.0, 2.5, 23.0};
    std::vector<double> spacings = {3.0, 1.5, 1.0, 0.5, 0.2};
    std::vector<double> errors;
    for (double sp : spacings) {
        MotionPlan plan = free_plan(origin, densify_polyline({a, b}, sp));
        ControllerGains g;
        SimConfig cfg;
        Trace t = execute_plan(plan, ControllerKind::Position, g, cfg, m);
        REQUIRE(t.status == SimStatus::Completed);
        errors.push_back(cross_track_error(t, {a, b}).mean);
    }
    for (size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] <= errors[i - 1] + 1e-9);
}

TEST_CASE("over-reel plan: velocity aborts at the singularity, position completes") {
    GridMap m = open_map();
    Vec3 origin{20.0, 0.5, 20.0};
    Vec3 a{17.0, 2.5, 17.0}, b{23.0, 2.5, 23.0};
    MotionPlan plan = free_plan(origin, densify_polyline({a, b}, 1.0));
    ControllerGains g;
    SimConfig cfg;
    Trace tv = execute_plan(plan, ControllerKind::Velocity, g, cfg, m);
    CHECK(tv.status == SimStatus::SingularityAbort);
    Trace tp = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    CHECK(tp.status == SimStatus::Completed);
    // the composite controller falls back to position control and completes
    Trace tc = execute_plan(plan, ControllerKind::Composite, g, cfg, m);
    CHECK(tc.status == SimStatus::Completed);
}

TEST_CASE("collision terminates the run with a collision status") {
    GridMap m(8, 4, 8, 1.0);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 4; ++j) m.set_occupied({4, j, k});
    m.set_start({0, 1, 0});
    Vec3 origin{0.5, 0.5, 0.5};
    MotionPlan plan = free_plan(origin, {{1.5, 1.5, 1.5}, {6.5, 1.5, 1.5}});
    ControllerGains g;
    SimConfig cfg;
    Trace t = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    CHECK(t.status == SimStatus::Collision);
}

TEST_CASE("frame shift keeps the world position consistent") {
    // one contact mid-plan: the polar state rebases without teleporting
    Vec3 origin{0.0, 0.0, 0.0};
    MotionPlan plan;
    plan.origin = origin;
    PlanStep s1;
    s1.waypoint = {2.0, 1.0, 0.0};
    s1.contact = origin;
    PlanStep s2;
    s2.waypoint = {2.0, 1.0, 2.0};
    s2.contact = {2.0, 1.2, 1.0};
    s2.contact_count = 1;
    s2.static_length = distance(origin, s2.contact);
    plan.steps = {s1, s2};
    GridMap m = open_map();
    ControllerGains g;
    SimConfig cfg;
    Trace t = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    REQUIRE(t.status == SimStatus::Completed);
    for (const TraceSample& smp : t.samples) {
        Vec3 contact = smp.waypoint_index == 0 ? origin : s2.contact;
        double stat = smp.waypoint_index == 0 ? 0.0 : s2.static_length;
        // noiseless run: the sensed polar state is the true one
        PolarCoord rel{smp.polar.length - stat, smp.polar.elevation, smp.polar.azimuth};
        CHECK(distance(contact + polar_to_cartesian(rel), smp.position) ==
              Catch::Approx(0.0).margin(1e-9));
    }
}

TEST_CASE("sensor noise is seeded and reproducible") {
    GridMap m = open_map();
    Vec3 origin{20.0, 0.5, 20.0};
    MotionPlan plan = free_plan(origin, {{22.0, 1.5, 20.0}, {24.0, 1.5, 20.0}});
    ControllerGains g;
    SimConfig cfg;
    cfg.noise_length = 0.02;
    cfg.noise_elevation = 0.005;
    cfg.noise_azimuth = 0.005;
    cfg.seed = 7;
    Trace t1 = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    Trace t2 = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    REQUIRE(t1.samples.size() == t2.samples.size());
    for (size_t i = 0; i < t1.samples.size(); ++i)
        CHECK(distance(t1.samples[i].position, t2.samples[i].position) == 0.0);
    cfg.seed = 8;
    Trace t3 = execute_plan(plan, ControllerKind::Position, g, cfg, m);
    bool differs = t3.samples.size() != t1.samples.size();
    for (size_t i = 0; !differs && i < std::min(t1.samples.size(), t3.samples.size()); ++i)
        differs = distance(t1.samples[i].position, t3.samples[i].position) > 0.0;
    CHECK(differs);
}

TEST_CASE("cross track statistics") {
    Trace t;
    std::vector<Vec3> path = {{0, 0, 0}, {2, 0, 0}};
    SECTION("points on the path give zeros") {
        for (double x : {0.0, 0.7, 1.9}) t.samples.push_back({0, {x, 0, 0}, {}, 0, 0});
        CrossTrackStats s = cross_track_error(t, path);
        CHECK(s.mean == 0.0);
        CHECK(s.rms == 0.0);
        CHECK(s.max == 0.0);
    }
    SECTION("constant offset") {
        for (double x : {0.0, 0.5, 1.0, 1.5, 2.0})
            t.samples.push_back({0, {x, 0.1, 0.0}, {}, 0, 0});
        CrossTrackStats s = cross_track_error(t, path);
        CHECK(s.mean == Catch::Approx(0.1));
        CHECK(s.max == Catch::Approx(0.1));
    }
    SECTION("semicircle against its chord peaks at the radius") {
        double r = 1.0;
        Trace arc;
        for (int i = 0; i <= 100; ++i) {
            double a = kPi * i / 100.0;
            arc.samples.push_back({0, {r - r * std::cos(a), r * std::sin(a), 0.0}, {}, 0, 0});
        }
        CrossTrackStats s = cross_track_error(arc, {{0, 0, 0}, {2 * r, 0, 0}});
        CHECK(s.max == Catch::Approx(r).epsilon(1e-3));
        // dense-sampling oracle for the mean: average of r*sin(a)
        CHECK(s.mean == Catch::Approx(2.0 * r / kPi).epsilon(0.01));
    }
}

TEST_CASE("smoothness of straight, square and circular traces") {
    Trace straight;
    for (int i = 0; i < 10; ++i) straight.samples.push_back({0, {1.0 * i, 0, 0}, {}, 0, 0});
    CHECK(smoothness(straight, 1) == Catch::Approx(0.0).margin(1e-12));

    Trace square;  // corner-aligned square wave turns 90 degrees at every step
    square.samples = {{0, {0, 0, 0}, {}, 0, 0}, {0, {1, 0, 0}, {}, 0, 0},
                      {0, {1, 1, 0}, {}, 0, 0}, {0, {2, 1, 0}, {}, 0, 0},
                      {0, {2, 2, 0}, {}, 0, 0}};
    CHECK(smoothness(square, 1) == Catch::Approx(kPi / 2.0));

    Trace circle;
    const int n = 36;
    for (int i = 0; i < n + 2; ++i) {
        double a = 2.0 * kPi * i / n;
        circle.samples.push_back({0, {std::cos(a), std::sin(a), 0.0}, {}, 0, 0});
    }
    CHECK(smoothness(circle, 1) == Catch::Approx(2.0 * kPi / n).epsilon(1e-9));

    Trace tiny;
    tiny.samples = {{0, {0, 0, 0}, {}, 0, 0}, {0, {1, 0, 0}, {}, 0, 0}};
    CHECK_THROWS_AS(smoothness(tiny, 1), std::invalid_argument);
}
