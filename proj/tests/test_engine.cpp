// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "pcm/config.hpp"
#include "pcm/engine.hpp"
#include "pcm/harness.hpp"

using namespace pcm;

namespace {
// Small device for structural engine checks (physics calibration targets the
// full-size default; these tests assert mechanics, not device behavior).
Config small_config() {
    Config cfg = default_config();
    cfg.geometry.gst_radius = 20e-9;
    cfg.geometry.contact_radius = 8e-9;
    cfg.geometry.domain_half_width = 80e-9;
    cfg.cell_size_nm = 2.0;
    cfg.experiment.thermalize_ns = 30.0;
    cfg.experiment.write_width_ns = 3.0;
    cfg.sync_derived();
    return cfg;
}
}  // namespace

TEST_CASE("idle state is a fixed point up to round-off") {
    Config cfg = small_config();
    Grid grid = cfg.make_grid();
    Engine eng(grid, cfg.materials, cfg.phase, cfg.circuit, cfg.engine, 7);
    CDField cd0 = eng.state().cd;
    InstantDrive drive;  // all sources zero, ambient boundary
    for (int s = 0; s < 5; ++s) {
        StepInfo info = eng.step(drive, 1e-9);
        CHECK(info.audit.residual() < 1e-9);
    }
    for (double T : eng.state().T) CHECK(T == doctest::Approx(293.0).epsilon(1e-12));
    CHECK(eng.state().cd.cd1 == cd0.cd1);
    CHECK(eng.state().cd.cd2 == cd0.cd2);
    CHECK(eng.state().time == doctest::Approx(5e-9));
    CHECK(eng.state().energy_J == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("runs are deterministic: identical trace for identical seeds") {
    Config cfg = small_config();
    Grid grid = cfg.make_grid();
    auto make_run = [&]() {
        Engine eng(grid, cfg.materials, cfg.phase, cfg.circuit, cfg.engine, 7);
        eng.reset(7, cfg.experiment.n_grains);
        ScheduleBuilder sb(cfg);
        int w = sb.add_write(2.0, 2.0);  // mild pulse
        sb.space_after_write(w);
        return eng.run(sb.finish());
    };
    RunResult a = make_run();
    RunResult b = make_run();
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].t == b.trace[i].t);
        CHECK(a.trace[i].i_w12 == b.trace[i].i_w12);
        CHECK(a.trace[i].i_w13 == b.trace[i].i_w13);
        CHECK(a.trace[i].q == b.trace[i].q);
        CHECK(a.trace[i].power == b.trace[i].power);
        CHECK(a.trace[i].event == b.trace[i].event);
    }
}

TEST_CASE("accepted dt shrinks during a write plateau versus idle") {
    Config cfg = small_config();
    Grid grid = cfg.make_grid();
    Engine eng(grid, cfg.materials, cfg.phase, cfg.circuit, cfg.engine, 7);
    ScheduleBuilder sb(cfg);
    int w = sb.add_write();
    sb.space_after_write(w);
    Schedule sched = sb.finish();
    RunResult run = eng.run(sched);

    double idle_dt_max = 0.0, pulse_dt_min = 1e9;
    for (std::size_t i = 1; i < run.trace.size(); ++i) {
        double dt = run.trace[i].t - run.trace[i - 1].t;
        double t = run.trace[i].t;
        if (t > sched.writes[0].t0 + 1.5e-9 && t < sched.writes[0].t1 - 1.5e-9)
            pulse_dt_min = std::min(pulse_dt_min, dt);
        if (t > sched.writes[0].t1 + 10e-9) idle_dt_max = std::max(idle_dt_max, dt);
    }
    CHECK(pulse_dt_min < idle_dt_max);
}

TEST_CASE("energy audit holds through a write cycle with and without Seebeck") {
    for (bool seebeck : {true, false}) {
        Config cfg = small_config();
        if (!seebeck) {
            cfg.materials.S_c = {0.0, 0.0};
            cfg.materials.S_a = {0.0, 0.0};
        }
        Grid grid = cfg.make_grid();
        Engine eng(grid, cfg.materials, cfg.phase, cfg.circuit, cfg.engine, 7);
        ScheduleBuilder sb(cfg);
        int w = sb.add_write();
        sb.space_after_write(w);
        RunResult run = eng.run(sb.finish());
        CHECK(run.max_audit_residual < 1e-3);
    }
}

TEST_CASE("device thermalizes back to ambient after the pulse") {
    Config cfg = small_config();
    Grid grid = cfg.make_grid();
    Engine eng(grid, cfg.materials, cfg.phase, cfg.circuit, cfg.engine, 7);
    ScheduleBuilder sb(cfg);
    int w = sb.add_write();
    sb.space_after_write(w);
    Schedule sched = sb.finish(60.0);
    RunResult run = eng.run(sched);
    double t_end_pulse = sched.writes[0].t1;
    bool reached = false;
    for (const TraceRow& r : run.trace)
        if (r.t > t_end_pulse && r.t <= t_end_pulse + 100e-9 && r.max_T < 294.0) reached = true;
    CHECK(reached);
}

TEST_CASE("state classification distinguishes the four outcomes") {
    Config cfg = small_config();
    Grid grid = cfg.make_grid();
    Engine eng(grid, cfg.materials, cfg.phase, cfg.circuit, cfg.engine, 7);
    CHECK(eng.classify_state() == Winner::Neither);

    SimulationState s = eng.state();
    auto blank_corridor = [&](int c1, int c2) {
        for (int c : corridor_cells(grid, c1, c2)) {
            s.cd.cd1[c] = 0.0;
            s.cd.cd2[c] = 0.0;
        }
    };
    blank_corridor(W1, W3);
    eng.set_state(s);
    CHECK(eng.classify_state() == Winner::W13);
    blank_corridor(W1, W2);
    eng.set_state(s);
    CHECK(eng.classify_state() == Winner::Both);
}

TEST_CASE("small-signal path resistance rises when a corridor amorphizes") {
    Config cfg = small_config();
    Grid grid = cfg.make_grid();
    Engine eng(grid, cfg.materials, cfg.phase, cfg.circuit, cfg.engine, 7);
    double r_fresh = eng.path_resistance(W1, W3);
    CHECK(r_fresh > 0.0);

    // Amorphize a band around the corridor, as a quenched melt would.
    SimulationState s = eng.state();
    auto line = corridor_cells(grid, W1, W3);
    for (int c : grid.gst_cells) {
        int i = c % grid.nx, j = c / grid.nx;
        for (int lc : line) {
            int li = lc % grid.nx, lj = lc / grid.nx;
            double d = std::hypot((i - li) * grid.h, (j - lj) * grid.h);
            if (d < 5e-9) {
                s.cd.cd1[c] = 0.0;
                s.cd.cd2[c] = 0.0;
                break;
            }
        }
    }
    eng.set_state(s);
    CHECK(eng.corridor(W1, W3) < 0.05);
    double r_blocked = eng.path_resistance(W1, W3);
    CHECK(r_blocked > 2.5 * r_fresh);
}

TEST_CASE("schedule breakpoints and boundary anneal ramp") {
    Schedule s;
    s.v_write.pulses.push_back({1e-9, 3.0, 1e-9, 5e-9, 1e-9});
    Schedule::AnnealInterval a;
    a.t0 = 20e-9;
    a.duration = 30e-9;
    a.T = 550.0;
    a.ramp = 5e-9;
    s.anneals.push_back(a);
    s.t_end = 100e-9;
    CHECK(s.boundary_T_at(19e-9, 293.0) == 293.0);
    CHECK(s.boundary_T_at(22.5e-9, 293.0) == doctest::Approx(293.0 + 0.5 * (550.0 - 293.0)));
    CHECK(s.boundary_T_at(30e-9, 293.0) == 550.0);
    CHECK(s.boundary_T_at(52.5e-9, 293.0) == doctest::Approx(293.0 + 0.5 * (550.0 - 293.0)));
    CHECK(s.boundary_T_at(60e-9, 293.0) == 293.0);
    auto bp = s.breakpoints();
    CHECK(bp.size() >= 8);
}

TEST_CASE("schedule builder lays out the read protocol") {
    Config cfg = default_config();
    ScheduleBuilder sb(cfg);
    int w = sb.add_write();
    sb.add_reads_after_write(w);
    sb.space_after_write(w);
    Schedule s = sb.finish();
    REQUIRE(s.writes.size() == 1);
    REQUIRE(s.reads.size() == 5);
    double w_end = s.writes[0].t1;
    CHECK(s.writes[0].t0 == doctest::Approx(1e-9));
    CHECK(w_end == doctest::Approx(8e-9));  // 1 rise + 5 width + 1 fall after 1 ns
    for (int r = 0; r < 5; ++r)
        CHECK(s.reads[r].t0 == doctest::Approx(w_end + 5e-9 + r * 10e-9));
    CHECK(s.t_end >= w_end + 60e-9);
}
