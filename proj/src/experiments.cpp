// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <thread>

#include "pcm/harness.hpp"
#include "pcm/io.hpp"

namespace pcm {

namespace {

using nlohmann::json;

constexpr double kContrastFloorV = 1e-9;

double contrast_of(double q, double qbar) {
    double hi = std::max(q, qbar), lo = std::min(q, qbar);
    return hi / std::max(lo, kContrastFloorV);
}

Engine make_engine(const Config& cfg, const Grid& grid, CircuitVariant variant) {
    CircuitParams circ = cfg.circuit;
    circ.variant = variant;
    Engine eng(grid, cfg.materials, cfg.phase, circ, cfg.engine, cfg.experiment.seed);
    eng.reset(cfg.experiment.seed, cfg.experiment.n_grains);
    return eng;
}

Winner opposite(Winner w) { return w == Winner::W12 ? Winner::W13 : Winner::W12; }

// Winner sequence must alternate strictly, with no ambiguous entries.
void check_alternation(ExperimentReport& rep, const std::vector<WriteOutcome>& writes,
                       std::size_t first = 0) {
    for (std::size_t k = first; k < writes.size(); ++k) {
        const WriteOutcome& o = writes[k];
        if (!o.resolved) {
            rep.fail("write " + std::to_string(k) + " never resolved (no quench before run end)");
            continue;
        }
        if (o.winner == Winner::Both || o.winner == Winner::Neither) {
            rep.fail("write " + std::to_string(k) + " ambiguous winner: " +
                     winner_name(o.winner));
            continue;
        }
        if (k > first) {
            const WriteOutcome& prev = writes[k - 1];
            if (prev.resolved && o.winner != opposite(prev.winner))
                rep.fail("write " + std::to_string(k) + " broke alternation (" +
                         winner_name(prev.winner) + " -> " + winner_name(o.winner) + ")");
        }
    }
}

json write_rows(const std::vector<WriteOutcome>& writes) {
    json rows = json::array();
    for (const auto& o : writes) {
        rows.push_back({{"write", o.index},
                        {"winner", winner_name(o.winner)},
                        {"resolved", o.resolved},
                        {"both_molten_during", o.both_molten_during},
                        {"corridor_W12", o.c12},
                        {"corridor_W13", o.c13}});
    }
    return rows;
}

void save_run(ExperimentReport& rep, const Config& cfg, const RunResult& run,
              const std::string& out_dir, const std::string& tag) {
    if (out_dir.empty()) return;
    ensure_directory(out_dir);
    std::string name = tag.empty() ? "trace.csv" : "trace_" + tag + ".csv";
    write_trace_csv(out_dir + "/" + name, run.trace);
    rep.artifacts.push_back(name);
    Grid grid = cfg.make_grid();
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "snapshot_%s%04.0fns.vtk", tag.empty() ? "" : (tag + "_").c_str(),
                      run.snapshots[s].t * 1e9);
        write_vtk_snapshot(out_dir + "/" + buf, grid, run.snapshots[s], cfg.materials.T_melt);
        rep.artifacts.push_back(buf);
    }
}

// Small worker pool for independent sweep points.
template <typename F>
void parallel_for_index(int n, F&& f) {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    for (int base = 0; base < n; base += static_cast<int>(hw)) {
        std::vector<std::future<void>> futs;
        for (int i = base; i < std::min(n, base + static_cast<int>(hw)); ++i)
            futs.push_back(std::async(std::launch::async, [&f, i] { f(i); }));
        for (auto& fu : futs) fu.get();
    }
}

}  // namespace

ScheduleBuilder::ScheduleBuilder(const Config& cfg) : cfg_(cfg), t_(1e-9) {}

int ScheduleBuilder::add_write(double width_ns, double amplitude) {
    const auto& e = cfg_.experiment;
    if (width_ns <= 0.0) width_ns = e.write_width_ns;
    if (amplitude <= 0.0) amplitude = cfg_.vdd;
    Waveform::Pulse p{t_, amplitude, e.rise_ns * 1e-9, width_ns * 1e-9, e.fall_ns * 1e-9};
    s_.v_write.pulses.push_back(p);
    s_.writes.push_back({p.t0, p.end()});
    t_ = p.end();
    return static_cast<int>(s_.writes.size()) - 1;
}

int ScheduleBuilder::add_read(bool x1_high, bool x2_high, int write_index, double t0) {
    const auto& e = cfg_.experiment;
    Waveform::Pulse gate{t0, cfg_.read_gate(), e.rise_ns * 1e-9, e.read_width_ns * 1e-9,
                         e.fall_ns * 1e-9};
    s_.v_read_gate.pulses.push_back(gate);
    if (x1_high) {
        Waveform::Pulse px = gate;
        px.amplitude = cfg_.circuit.v_read_rail;
        s_.x1.pulses.push_back(px);
    }
    if (x2_high) {
        Waveform::Pulse px = gate;
        px.amplitude = cfg_.circuit.v_read_rail;
        s_.x2.pulses.push_back(px);
    }
    s_.reads.push_back({gate.t0, gate.end(), write_index, x1_high, x2_high});
    return static_cast<int>(s_.reads.size()) - 1;
}

void ScheduleBuilder::add_reads_after_write(int write_index) {
    const auto& e = cfg_.experiment;
    double base = s_.writes.at(write_index).t1 + e.read_delay_ns * 1e-9;
    for (int r = 0; r < e.n_reads; ++r)
        add_read(false, false, write_index, base + r * e.read_spacing_ns * 1e-9);
    t_ = std::max(t_, base + (e.n_reads - 1) * e.read_spacing_ns * 1e-9 +
                          (e.rise_ns + e.read_width_ns + e.fall_ns) * 1e-9);
}

void ScheduleBuilder::add_mux_read_burst(int write_index) {
    const auto& e = cfg_.experiment;
    double base = s_.writes.at(write_index).t1 + e.read_delay_ns * 1e-9;
    const bool combos[4][2] = {{false, false}, {false, true}, {true, false}, {true, true}};
    for (int r = 0; r < 4; ++r)
        add_read(combos[r][0], combos[r][1], write_index, base + r * e.read_spacing_ns * 1e-9);
    t_ = std::max(t_, base + 3 * e.read_spacing_ns * 1e-9 +
                          (e.rise_ns + e.read_width_ns + e.fall_ns) * 1e-9);
}

int ScheduleBuilder::add_read_now(bool x1_high, bool x2_high, int write_index) {
    int r = add_read(x1_high, x2_high, write_index, t_);
    t_ += cfg_.experiment.read_spacing_ns * 1e-9;
    return r;
}

void ScheduleBuilder::add_anneal(double T_K, double duration_ns) {
    Schedule::AnnealInterval a;
    a.t0 = t_;
    a.duration = duration_ns * 1e-9;
    a.T = T_K;
    s_.anneals.push_back(a);
    t_ = a.t0 + a.duration + 2.0 * a.ramp;
}

void ScheduleBuilder::add_snapshot(double t_ns) { s_.snapshot_times.push_back(t_ns * 1e-9); }

void ScheduleBuilder::space_after_write(int write_index) {
    t_ = std::max(t_, s_.writes.at(write_index).t1 + cfg_.experiment.thermalize_ns * 1e-9);
}

Schedule ScheduleBuilder::finish(double tail_ns) {
    s_.t_end = t_ + tail_ns * 1e-9;
    s_.vdd = cfg_.vdd;
    std::sort(s_.snapshot_times.begin(), s_.snapshot_times.end());
    return s_;
}

std::vector<ReadMeasurement> measure_reads(const RunResult& run, const Schedule& schedule) {
    std::vector<ReadMeasurement> out;
    const auto& tr = run.trace;
    auto row_at_or_after = [&](double t) -> const TraceRow* {
        auto it = std::lower_bound(tr.begin(), tr.end(), t,
                                   [](const TraceRow& r, double v) { return r.t < v; });
        return it == tr.end() ? nullptr : &*it;
    };
    auto row_at_or_before = [&](double t) -> const TraceRow* {
        auto it = std::upper_bound(tr.begin(), tr.end(), t,
                                   [](double v, const TraceRow& r) { return v < r.t; });
        if (it == tr.begin()) return nullptr;
        return &*(--it);
    };
    for (std::size_t r = 0; r < schedule.reads.size(); ++r) {
        const auto& win = schedule.reads[r];
        ReadMeasurement m;
        m.read_index = static_cast<int>(r);
        m.after_write = win.after_write;
        m.x1_high = win.x1_high;
        m.x2_high = win.x2_high;
        double span = win.t1 - win.t0;
        m.t_mid = win.t0 + 0.5 * span;
        const TraceRow* mid = row_at_or_after(m.t_mid);
        if (!mid) continue;
        m.q = mid->q;
        m.qbar = mid->qbar;
        m.y = mid->y;
        m.contrast = contrast_of(m.q, m.qbar);
        const TraceRow* before = row_at_or_before(win.t0);
        const TraceRow* after = row_at_or_after(win.t1);
        if (before && after) {
            m.c12_delta = std::fabs(after->c12 - before->c12);
            m.c13_delta = std::fabs(after->c13 - before->c13);
        }
        out.push_back(m);
    }
    return out;
}

double energy_in_window(const std::vector<TraceRow>& trace, double t0, double t1) {
    double e0 = 0.0, e1 = 0.0;
    bool got0 = false;
    for (const TraceRow& r : trace) {
        if (!got0 && r.t >= t0) {
            e0 = r.energy;
            got0 = true;
        }
        if (r.t <= t1) e1 = r.energy;
    }
    return e1 - e0;
}

double peak_in_window(const std::vector<TraceRow>& trace, double t0, double t1,
                      double (*value)(const TraceRow&)) {
    double m = 0.0;
    for (const TraceRow& r : trace)
        if (r.t >= t0 && r.t <= t1) m = std::max(m, value(r));
    return m;
}

ExperimentReport exp_initialize(const Config& cfg, const std::string& out_dir) {
    ExperimentReport rep;
    rep.experiment = "initialize";
    rep.config_echo = config_to_json(cfg);

    Grid grid = cfg.make_grid();
    Engine eng = make_engine(cfg, grid, cfg.circuit.variant);

    ScheduleBuilder sb(cfg);
    int w = sb.add_write();
    sb.add_snapshot(0.5);
    sb.add_snapshot((sb.cursor_ns() + 1.0) / 2.0);  // mid-pulse-ish
    sb.space_after_write(w);
    Schedule sched = sb.finish();
    RunResult run = eng.run(sched);

    const WriteOutcome& o = run.writes.at(0);
    rep.rows = write_rows(run.writes);
    rep.scalars["winner"] = winner_name(o.winner);
    rep.scalars["corridor_W12"] = o.c12;
    rep.scalars["corridor_W13"] = o.c13;
    rep.scalars["peak_write_current_uA"] =
        peak_in_window(run.trace, o.t_begin, o.t_end,
                       [](const TraceRow& r) { return r.i_w12 + r.i_w13; }) * 1e6;
    rep.scalars["max_power_uW"] =
        peak_in_window(run.trace, o.t_begin, o.t_end, [](const TraceRow& r) { return r.power; }) *
        1e6;
    rep.scalars["write_energy_pJ"] = energy_in_window(run.trace, o.t_begin, o.t_end) * 1e12;
    rep.scalars["max_audit_residual"] = run.max_audit_residual;

    rep.check(o.resolved, "write outcome not resolved before run end");
    if (sched.v_write.end_time() > 0 && cfg.vdd > 0) {
        rep.check(o.winner == Winner::W12 || o.winner == Winner::W13,
                  std::string("ambiguous initialization winner: ") + winner_name(o.winner));
    }
    save_run(rep, cfg, run, out_dir, "");
    return rep;
}

ExperimentReport exp_toggle_flipflop(const Config& cfg, int n_pulses, const std::string& out_dir) {
    ExperimentReport rep;
    rep.experiment = "toggle-flipflop";
    rep.config_echo = config_to_json(cfg);
    if (n_pulses < 2) {
        rep.fail("n_pulses must be >= 2");
        return rep;
    }

    Grid grid = cfg.make_grid();
    Engine eng = make_engine(cfg, grid, CircuitVariant::FlipFlop);

    ScheduleBuilder sb(cfg);
    for (int k = 0; k < 1 + n_pulses; ++k) {
        int w = sb.add_write();
        sb.add_reads_after_write(w);
        sb.space_after_write(w);
    }
    Schedule sched = sb.finish();
    RunResult run = eng.run(sched);
    std::vector<ReadMeasurement> reads = measure_reads(run, sched);

    rep.rows = write_rows(run.writes);
    check_alternation(rep, run.writes);

    // Contrast dynamics per write burst: first read early, last stabilized.
    json bursts = json::array();
    double min_early = 1e300, min_stab = 1e300;
    double max_disturb = 0.0;
    bool monotone = true;
    for (std::size_t w = 0; w < run.writes.size(); ++w) {
        std::vector<const ReadMeasurement*> burst;
        for (const auto& m : reads)
            if (m.after_write == static_cast<int>(w)) burst.push_back(&m);
        if (burst.empty()) continue;
        json series = json::array();
        for (std::size_t i = 0; i < burst.size(); ++i) {
            series.push_back({{"t_after_write_ns",
                               (burst[i]->t_mid - run.writes[w].t_end) * 1e9},
                              {"Q_V", burst[i]->q},
                              {"Qbar_V", burst[i]->qbar},
                              {"ratio", burst[i]->contrast}});
            if (i > 0 && burst[i]->contrast < burst[i - 1]->contrast * 0.999) monotone = false;
            max_disturb = std::max({max_disturb, burst[i]->c12_delta, burst[i]->c13_delta});
        }
        min_early = std::min(min_early, burst.front()->contrast);
        min_stab = std::min(min_stab, burst.back()->contrast);
        bursts.push_back({{"write", w}, {"reads", series}});
    }
    rep.scalars["read_bursts"] = bursts;
    rep.scalars["min_early_contrast"] = min_early;
    rep.scalars["min_stabilized_contrast"] = min_stab;
    rep.scalars["max_read_disturb"] = max_disturb;
    rep.scalars["ratio_monotone_during_cooldown"] = monotone;
    rep.scalars["max_audit_residual"] = run.max_audit_residual;

    // Time back to within 1 K of ambient after each pulse.
    double worst_therm = 0.0;
    bool thermalized = true;
    for (std::size_t w = 0; w < run.writes.size(); ++w) {
        double next_write = (w + 1 < run.writes.size()) ? run.writes[w + 1].t_begin : 1e30;
        double reached = -1.0;
        for (const TraceRow& r : run.trace) {
            if (r.t <= run.writes[w].t_end || r.t >= next_write) continue;
            if (r.max_T < cfg.materials.T_ambient + 1.0) {
                reached = r.t - run.writes[w].t_end;
                break;
            }
        }
        if (reached < 0.0)
            thermalized = false;
        else
            worst_therm = std::max(worst_therm, reached);
    }
    rep.scalars["thermalized_all_pulses"] = thermalized;
    rep.scalars["max_thermalize_ns"] = worst_therm * 1e9;
    rep.check(thermalized && worst_therm * 1e9 <= cfg.bands.thermalize_within_ns,
              "thermalization exceeded " + std::to_string(cfg.bands.thermalize_within_ns) + " ns");

    const AcceptanceBands& b = cfg.bands;
    rep.check(min_early >= b.early_contrast_min,
              "early contrast " + std::to_string(min_early) + " < " +
                  std::to_string(b.early_contrast_min));
    rep.check(min_stab >= b.stabilized_contrast_min,
              "stabilized contrast " + std::to_string(min_stab) + " < " +
                  std::to_string(b.stabilized_contrast_min));
    rep.check(monotone, "contrast ratio not monotone during cooldown");
    rep.check(max_disturb < b.read_disturb_max,
              "read disturb " + std::to_string(max_disturb) + " >= " +
                  std::to_string(b.read_disturb_max));
    save_run(rep, cfg, run, out_dir, "");
    return rep;
}

ExperimentReport exp_toggle_mux(const Config& cfg, const std::string& out_dir) {
    ExperimentReport rep;
    rep.experiment = "toggle-mux";
    rep.config_echo = config_to_json(cfg);

    Grid grid = cfg.make_grid();
    Engine eng = make_engine(cfg, grid, CircuitVariant::Mux);

    ScheduleBuilder sb(cfg);
    for (int k = 0; k < 2; ++k) {
        int w = sb.add_write();
        sb.add_mux_read_burst(w);
        sb.space_after_write(w);
    }
    Schedule sched = sb.finish();
    RunResult run = eng.run(sched);
    std::vector<ReadMeasurement> reads = measure_reads(run, sched);

    rep.rows = write_rows(run.writes);
    check_alternation(rep, run.writes);

    json table = json::array();
    for (int w = 0; w < 2; ++w) {
        std::vector<const ReadMeasurement*> burst;
        for (const auto& m : reads)
            if (m.after_write == w) burst.push_back(&m);
        if (burst.size() != 4) {
            rep.fail("expected 4 mux reads after write " + std::to_string(w));
            continue;
        }
        double y_ref = 0.0;
        for (const auto* m : burst) y_ref = std::max(y_ref, m->y);
        double thr = 0.5 * y_ref;
        // After the first write Y follows X1, after the second X2.
        for (const auto* m : burst) {
            bool selected = (w == 0) ? m->x1_high : m->x2_high;
            bool high = m->y > thr;
            bool ok = (high == selected);
            table.push_back({{"write", w},
                             {"X1", m->x1_high ? 1 : 0},
                             {"X2", m->x2_high ? 1 : 0},
                             {"Y_V", m->y},
                             {"threshold_V", thr},
                             {"expected", selected ? 1 : 0},
                             {"got", high ? 1 : 0},
                             {"ok", ok}});
            if (!ok)
                rep.fail("mux row failed after write " + std::to_string(w) + ": X1=" +
                         std::to_string(m->x1_high) + " X2=" + std::to_string(m->x2_high) +
                         " Y=" + std::to_string(m->y) + " thr=" + std::to_string(thr));
        }
    }
    rep.scalars["truth_table"] = table;
    rep.scalars["max_audit_residual"] = run.max_audit_residual;
    save_run(rep, cfg, run, out_dir, "");
    return rep;
}

ExperimentReport exp_rl_sweep(const Config& cfg, const std::string& out_dir) {
    ExperimentReport rep;
    rep.experiment = "rl-sweep";
    rep.config_echo = config_to_json(cfg);

    Grid grid = cfg.make_grid();
    Engine eng = make_engine(cfg, grid, CircuitVariant::FlipFlop);
    ScheduleBuilder sb(cfg);
    int w = sb.add_write();
    sb.space_after_write(w);
    Schedule init_sched = sb.finish();
    RunResult init_run = eng.run(init_sched);
    if (!init_run.writes.at(0).resolved || init_run.writes[0].winner == Winner::Both ||
        init_run.writes[0].winner == Winner::Neither) {
        rep.fail("initialization did not produce a clean winner");
        return rep;
    }
    SimulationState cold = eng.state();

    const auto& rls = cfg.experiment.rl_list_ohm;
    std::vector<double> v_high(rls.size()), v_low(rls.size()), ratio(rls.size());
    std::vector<std::string> errors(rls.size());
    parallel_for_index(static_cast<int>(rls.size()), [&](int i) {
        try {
            Config c = cfg;
            c.circuit.r_load = rls[i];
            CircuitParams circ = c.circuit;
            circ.variant = CircuitVariant::FlipFlop;
            Engine e2(grid, c.materials, c.phase, circ, c.engine, c.experiment.seed);
            e2.set_state(cold);
            ScheduleBuilder rb(c);
            rb.set_cursor_ns(cold.time * 1e9 + 2.0);
            rb.add_read_now(false, false, -1);
            Schedule rs = rb.finish();
            RunResult rr = e2.run(rs);
            auto ms = measure_reads(rr, rs);
            if (ms.empty()) throw std::runtime_error("no read measurement");
            v_high[i] = std::max(ms[0].q, ms[0].qbar);
            v_low[i] = std::min(ms[0].q, ms[0].qbar);
            ratio[i] = contrast_of(ms[0].q, ms[0].qbar);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    json rows = json::array();
    for (std::size_t i = 0; i < rls.size(); ++i) {
        if (!errors[i].empty()) {
            rep.fail("R_L=" + std::to_string(rls[i]) + ": " + errors[i]);
            continue;
        }
        rows.push_back({{"R_L_ohm", rls[i]},
                        {"V_high_V", v_high[i]},
                        {"V_low_V", v_low[i]},
                        {"ratio", ratio[i]}});
        if (i > 0) {
            rep.check(v_high[i] > v_high[i - 1],
                      "V_high not increasing at R_L=" + std::to_string(rls[i]));
            rep.check(ratio[i] < ratio[i - 1],
                      "ratio not decreasing at R_L=" + std::to_string(rls[i]));
        }
    }
    rep.rows = rows;
    if (!out_dir.empty()) {
        ensure_directory(out_dir);
        write_trace_csv(out_dir + "/trace_init.csv", init_run.trace);
        rep.artifacts.push_back("trace_init.csv");
    }
    return rep;
}

ExperimentReport exp_scaling(const Config& cfg, const std::string& out_dir) {
    ExperimentReport rep;
    rep.experiment = "scaling";
    rep.config_echo = config_to_json(cfg);

    const auto& depths = cfg.experiment.depths_nm;
    struct DepthResult {
        double depth_nm = 0.0, vdd = 0.0;
        double peak_i = 0.0, peak_p = 0.0, energy = 0.0;
        bool toggled = false;
        std::string error;
        RunResult run;
        Config c;
    };
    std::vector<DepthResult> res(depths.size());

    parallel_for_index(static_cast<int>(depths.size()), [&](int i) {
        DepthResult& r = res[i];
        r.depth_nm = depths[i];
        try {
            Config c = cfg;
            c.geometry.depth = depths[i] * 1e-9;
            char key[16];
            std::snprintf(key, sizeof(key), "%g", depths[i]);
            auto it = c.experiment.vdd_by_depth.find(key);
            if (it == c.experiment.vdd_by_depth.end())
                throw ConfigError("no V_DD preset for depth " + std::string(key));
            c.vdd = it->second;
            r.vdd = c.vdd;
            r.c = c;

            Grid grid = c.make_grid();
            Engine eng = make_engine(c, grid, CircuitVariant::FlipFlop);
            ScheduleBuilder sb(c);
            for (int k = 0; k < 3; ++k) {
                int w = sb.add_write();
                sb.space_after_write(w);
            }
            Schedule sched = sb.finish();
            r.run = eng.run(sched);

            r.toggled = true;
            for (std::size_t k = 0; k < r.run.writes.size(); ++k) {
                const auto& o = r.run.writes[k];
                if (!o.resolved || o.winner == Winner::Both || o.winner == Winner::Neither)
                    r.toggled = false;
                else if (k > 0 && r.run.writes[k - 1].resolved &&
                         o.winner == r.run.writes[k - 1].winner)
                    r.toggled = false;
            }
            for (const auto& o : r.run.writes) {
                r.peak_i = std::max(r.peak_i,
                                    peak_in_window(r.run.trace, o.t_begin, o.t_end,
                                                   [](const TraceRow& t) {
                                                       return t.i_w12 + t.i_w13;
                                                   }));
                r.peak_p = std::max(r.peak_p,
                                    peak_in_window(r.run.trace, o.t_begin, o.t_end,
                                                   [](const TraceRow& t) { return t.power; }));
                r.energy = std::max(r.energy,
                                    energy_in_window(r.run.trace, o.t_begin, o.t_end));
            }
        } catch (const std::exception& e) {
            r.error = e.what();
        }
    });

    json rows = json::array();
    for (std::size_t i = 0; i < res.size(); ++i) {
        const DepthResult& r = res[i];
        if (!r.error.empty()) {
            rep.fail("depth " + std::to_string(r.depth_nm) + " nm: " + r.error);
            continue;
        }
        rows.push_back({{"depth_nm", r.depth_nm},
                        {"V_DD_V", r.vdd},
                        {"peak_write_current_uA", r.peak_i * 1e6},
                        {"max_power_uW", r.peak_p * 1e6},
                        {"write_energy_pJ", r.energy * 1e12},
                        {"toggled", r.toggled}});
        rep.check(r.toggled, "toggle failure at depth " + std::to_string(r.depth_nm) + " nm");
        if (i > 0 && res[i - 1].error.empty()) {
            rep.check(r.peak_i < res[i - 1].peak_i,
                      "peak current not decreasing at depth " + std::to_string(r.depth_nm));
            rep.check(r.peak_p < res[i - 1].peak_p,
                      "peak power not decreasing at depth " + std::to_string(r.depth_nm));
            rep.check(r.energy < res[i - 1].energy,
                      "write energy not decreasing at depth " + std::to_string(r.depth_nm));
        }
        if (!out_dir.empty()) {
            ensure_directory(out_dir);
            char tag[32];
            std::snprintf(tag, sizeof(tag), "depth%g", r.depth_nm);
            write_trace_csv(out_dir + "/trace_" + tag + ".csv", r.run.trace);
            rep.artifacts.push_back("trace_" + std::string(tag) + ".csv");
        }
    }
    rep.rows = rows;

    // Ratio bands vs the 20 nm row (Table-style comparisons).
    auto find_depth = [&](double d) -> const DepthResult* {
        for (const auto& r : res)
            if (r.depth_nm == d && r.error.empty()) return &r;
        return nullptr;
    };
    const DepthResult* d20 = find_depth(20.0);
    const DepthResult* d10 = find_depth(10.0);
    const DepthResult* d5 = find_depth(5.0);
    const AcceptanceBands& b = cfg.bands;
    if (d20 && d10) {
        double v = d10->peak_i / d20->peak_i;
        rep.scalars["i10_over_i20"] = v;
        rep.check(v >= b.i10_over_i20.lo && v <= b.i10_over_i20.hi,
                  "I(10)/I(20) = " + std::to_string(v) + " outside [" +
                      std::to_string(b.i10_over_i20.lo) + ", " +
                      std::to_string(b.i10_over_i20.hi) + "]");
    }
    if (d20 && d5) {
        double v = d5->peak_i / d20->peak_i;
        rep.scalars["i5_over_i20"] = v;
        rep.check(v >= b.i5_over_i20.lo && v <= b.i5_over_i20.hi,
                  "I(5)/I(20) = " + std::to_string(v) + " outside band");
        double pv = d5->peak_p / d20->peak_p;
        rep.scalars["p5_over_p20"] = pv;
        rep.check(pv >= b.p5_over_p20.lo && pv <= b.p5_over_p20.hi,
                  "P(5)/P(20) = " + std::to_string(pv) + " outside band");
    }
    return rep;
}

ExperimentReport exp_min_amorph_time(const Config& cfg, const std::string& out_dir) {
    ExperimentReport rep;
    rep.experiment = "min-amorph-time";
    rep.config_echo = config_to_json(cfg);

    auto probe = [&](double radius_nm, double width_ns) -> Winner {
        Config c = cfg;
        c.geometry.gst_radius = radius_nm * 1e-9;
        Grid grid = c.make_grid();
        Engine eng = make_engine(c, grid, CircuitVariant::FlipFlop);
        ScheduleBuilder sb(c);
        int w = sb.add_write(width_ns);
        (void)w;
        Schedule sched = sb.finish(25.0);
        RunResult run = eng.run(sched);
        if (!run.writes.at(0).resolved) return Winner::Neither;
        return run.writes[0].winner;
    };

    json rows = json::array();
    std::vector<double> minima;
    for (double radius : cfg.experiment.radii_nm) {
        // Width grid 1..20 ns at 0.5 ns resolution; melting is monotone in
        // width, so bisect the first success index.
        auto melted = [&](double w_ns) {
            Winner w = probe(radius, w_ns);
            return w != Winner::Neither;
        };
        const double w_lo = 1.0, w_hi = 20.0, step = 0.5;
        int k_hi = static_cast<int>(std::round((w_hi - w_lo) / step));
        if (!melted(w_hi)) {
            rep.fail("radius " + std::to_string(radius) + " nm: no width in [1,20] ns succeeds");
            continue;
        }
        int lo = -1, hi = k_hi;  // lo: known fail, hi: known success
        if (melted(w_lo))
            hi = 0;
        else
            lo = 0;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            if (melted(w_lo + mid * step))
                hi = mid;
            else
                lo = mid;
        }
        double w_min = w_lo + hi * step;
        Winner at_min = probe(radius, w_min);
        bool clean = (at_min == Winner::W12 || at_min == Winner::W13);
        rows.push_back({{"radius_nm", radius},
                        {"min_width_ns", w_min},
                        {"winner_at_min", winner_name(at_min)},
                        {"clean_single_path", clean}});
        rep.check(clean, "radius " + std::to_string(radius) +
                             " nm: minimum width does not give a clean single-path winner");
        const Band& b = cfg.bands.min_amorph_ns;
        rep.check(w_min >= b.lo && w_min <= b.hi,
                  "minimum width " + std::to_string(w_min) + " ns outside [" +
                      std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]");
        minima.push_back(w_min);
    }
    rep.rows = rows;
    if (minima.size() >= 2)
        rep.check(minima.front() <= minima.back() + 1e-9,
                  "smaller patch does not have the smaller minimum pulse width");
    if (!out_dir.empty()) ensure_directory(out_dir);
    return rep;
}

ExperimentReport exp_failure_anneal(const Config& cfg, const std::string& out_dir) {
    ExperimentReport rep;
    rep.experiment = "failure-anneal";
    rep.config_echo = config_to_json(cfg);

    Grid grid = cfg.make_grid();
    Engine eng = make_engine(cfg, grid, CircuitVariant::FlipFlop);

    ScheduleBuilder sb(cfg);
    int w0 = sb.add_write(cfg.experiment.overlong_write_ns);
    sb.space_after_write(w0);
    sb.add_anneal(cfg.experiment.anneal_T_K, cfg.experiment.anneal_ns);
    sb.set_cursor_ns(sb.cursor_ns() + cfg.experiment.thermalize_ns);  // cool after the anneal
    for (int k = 0; k < 3; ++k) {
        int w = sb.add_write();
        sb.space_after_write(w);
    }
    Schedule sched = sb.finish();
    RunResult run = eng.run(sched);
    rep.rows = write_rows(run.writes);

    const WriteOutcome& over = run.writes.at(0);
    rep.scalars["overlong_winner"] = winner_name(over.winner);
    rep.scalars["both_molten_during_overlong"] = over.both_molten_during;
    rep.check(over.both_molten_during, "overlong pulse did not melt both paths during the pulse");
    rep.check(over.winner == Winner::Both,
              std::string("overlong pulse outcome was ") + winner_name(over.winner) +
                  ", expected both");

    // The anneal must restore both write corridors before the re-init pulse.
    double t_after_anneal = sched.writes.at(1).t0 - 1e-10;
    double c12 = 0.0, c13 = 0.0;
    for (const TraceRow& r : run.trace)
        if (r.t <= t_after_anneal) {
            c12 = r.c12;
            c13 = r.c13;
        }
    rep.scalars["corridor_W12_after_anneal"] = c12;
    rep.scalars["corridor_W13_after_anneal"] = c13;
    rep.check(c12 > 0.9 && c13 > 0.9, "anneal did not restore crystalline corridors");

    check_alternation(rep, run.writes, 1);
    rep.scalars["max_audit_residual"] = run.max_audit_residual;
    save_run(rep, cfg, run, out_dir, "");
    return rep;
}

ExperimentReport run_experiment(const std::string& name, const Config& cfg,
                                const std::string& out_dir, int n_pulses) {
    if (name == "initialize") return exp_initialize(cfg, out_dir);
    if (name == "toggle-flipflop") return exp_toggle_flipflop(cfg, n_pulses, out_dir);
    if (name == "toggle-mux") return exp_toggle_mux(cfg, out_dir);
    if (name == "rl-sweep") return exp_rl_sweep(cfg, out_dir);
    if (name == "scaling") return exp_scaling(cfg, out_dir);
    if (name == "min-amorph-time") return exp_min_amorph_time(cfg, out_dir);
    if (name == "failure-anneal") return exp_failure_anneal(cfg, out_dir);
    throw ConfigError("unknown experiment '" + name +
                      "' (initialize, toggle-flipflop, toggle-mux, rl-sweep, scaling, "
                      "min-amorph-time, failure-anneal)");
}

void write_report(const ExperimentReport& rep, const std::string& out_dir) {
    if (out_dir.empty()) return;
    ensure_directory(out_dir);
    json j{{"experiment", rep.experiment},
           {"pass", rep.pass},
           {"failures", rep.failures},
           {"scalars", rep.scalars},
           {"rows", rep.rows},
           {"artifacts", rep.artifacts},
           {"config", rep.config_echo}};
    std::ofstream f(out_dir + "/report.json", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write report to " + out_dir);
    f << j.dump(2) << "\n";
}

}  // namespace pcm
