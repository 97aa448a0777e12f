// SPDX-License-Identifier: Apache-2.0

#include "pcm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace pcm {

const char* winner_name(Winner w) {
    switch (w) {
        case Winner::W12: return "W12";
        case Winner::W13: return "W13";
        case Winner::Both: return "both";
        case Winner::Neither: return "none";
    }
    return "?";
}

double Schedule::boundary_T_at(double t, double ambient) const {
    double T = ambient;
    for (const AnnealInterval& a : anneals) {
        double t1 = a.t0 + a.duration;
        if (t <= a.t0 || t >= t1 + a.ramp) continue;
        double lvl;
        if (t < a.t0 + a.ramp)
            lvl = (t - a.t0) / a.ramp;
        else if (t < t1)
            lvl = 1.0;
        else
            lvl = 1.0 - (t - t1) / a.ramp;
        T = std::max(T, ambient + lvl * (a.T - ambient));
    }
    return T;
}

bool Schedule::any_active(double t0, double t1) const {
    if (v_write.active_in(t0, t1) || v_read_gate.active_in(t0, t1) || x1.active_in(t0, t1) ||
        x2.active_in(t0, t1))
        return true;
    return false;
}

std::vector<double> Schedule::breakpoints() const {
    std::set<double> bp;
    auto add_wave = [&](const Waveform& w) {
        for (const auto& p : w.pulses) {
            bp.insert(p.t0);
            bp.insert(p.t0 + p.rise);
            bp.insert(p.t0 + p.rise + p.width);
            bp.insert(p.end());
        }
    };
    add_wave(v_write);
    add_wave(v_read_gate);
    add_wave(x1);
    add_wave(x2);
    for (const auto& a : anneals) {
        bp.insert(a.t0);
        bp.insert(a.t0 + a.ramp);
        bp.insert(a.t0 + a.duration);
        bp.insert(a.t0 + a.duration + a.ramp);
    }
    for (double t : snapshot_times) bp.insert(t);
    bp.insert(t_end);
    std::vector<double> out(bp.begin(), bp.end());
    return out;
}

Engine::Engine(const Grid& grid, const MaterialModel& mat, const PhaseRates& rates,
               const CircuitParams& circuit, const EngineParams& params, std::uint64_t seed)
    : grid_(grid),
      mat_(mat),
      rates_(rates),
      circuit_(circuit),
      params_(params),
      esolver_(grid, std::array<bool, kNumPorts>{}),  // all ports driven
      tsolver_(grid) {
    mat_.validate();
    rates_.validate();
    reset(seed);
}

void Engine::reset(std::uint64_t seed, int n_grains) {
    seed_ = seed;
    state_ = SimulationState{};
    state_.cd = init_grain_map(grid_, seed, n_grains);
    state_.T.assign(grid_.cells(), mat_.T_ambient);
    state_.E_mag.assign(grid_.cells(), 0.0);
    state_.q_latent.assign(grid_.cells(), 0.0);
    have_extraction_ = false;
    warm_V_.clear();
    warm_T_.clear();
}

void Engine::set_state(const SimulationState& s) {
    state_ = s;
    have_extraction_ = false;
    warm_V_.clear();
    warm_T_.clear();
}

void Engine::build_material_fields(const std::vector<double>& E) {
    const int n = grid_.cells();
    sigma_base_.assign(n, 0.0);
    seebeck_.assign(n, 0.0);
    k_cell_.assign(n, 0.0);
    rho_cp_cell_.assign(n, 0.0);
    molten_.assign(n, 0);
    for (int c = 0; c < n; ++c) {
        double T = state_.T[c];
        switch (grid_.material[c]) {
            case Material::Oxide:
                k_cell_[c] = mat_.thermal_k(Material::Oxide, 0.0, T);
                rho_cp_cell_[c] = mat_.rho_cp(Material::Oxide, T);
                break;
            case Material::Tin:
                sigma_base_[c] = mat_.sigma_tin;
                k_cell_[c] = mat_.thermal_k(Material::Tin, 0.0, T);
                rho_cp_cell_[c] = mat_.rho_cp(Material::Tin, T);
                break;
            case Material::Gst: {
                double mix = std::clamp(state_.cd.norm1(c), 0.0, 1.0);
                bool molten = T > mat_.T_melt;
                molten_[c] = molten ? 1 : 0;
                sigma_base_[c] = mat_.sigma(mix, T, E[c], molten);
                seebeck_[c] = mat_.seebeck(mix, T);
                k_cell_[c] = mat_.thermal_k(Material::Gst, mix, T);
                rho_cp_cell_[c] = mat_.rho_cp(Material::Gst, T);
                break;
            }
        }
    }
}

void Engine::build_face_multipliers() {
    const int n = grid_.cells();
    if (mat_.gb_penalty <= 0.0) {
        face_mult_x_.clear();
        face_mult_y_.clear();
        return;
    }
    face_mult_x_.assign(n, 1.0);
    face_mult_y_.assign(n, 1.0);
    auto mismatch = [&](int a, int b) {
        double na = state_.cd.norm1(a), nb = state_.cd.norm1(b);
        if (na < 0.5 || nb < 0.5) return 0.0;  // boundaries only between grains
        double cross = std::fabs(state_.cd.cd1[a] * state_.cd.cd2[b] -
                                 state_.cd.cd2[a] * state_.cd.cd1[b]);
        return cross / (na * nb);
    };
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i) {
            int c = grid_.idx(i, j);
            if (grid_.material[c] != Material::Gst) continue;
            if (i + 1 < grid_.nx && grid_.material[grid_.idx(i + 1, j)] == Material::Gst)
                face_mult_x_[c] = 1.0 - mat_.gb_penalty * mismatch(c, grid_.idx(i + 1, j));
            if (j + 1 < grid_.ny && grid_.material[grid_.idx(i, j + 1)] == Material::Gst)
                face_mult_y_[c] = 1.0 - mat_.gb_penalty * mismatch(c, grid_.idx(i, j + 1));
        }
}

double Engine::sigma_drift() const {
    if (sigma_extract_.empty()) return 1e30;
    double worst = 0.0;
    for (int c : grid_.gst_cells) {
        double ref = sigma_extract_[c];
        if (ref <= 0.0) continue;
        worst = std::max(worst, std::fabs(sigma_iter_[c] - ref) / ref);
    }
    return worst;
}

void Engine::extract_multiport() {
    std::array<double, kNumPorts> v{};
    std::vector<double> scratch;
    ElectricalSolution zero = esolver_.solve(v, &scratch, params_.cg_tol_electrical);
    dev_cache_.b = zero.port_current;
    for (int q = 0; q < kNumPorts; ++q) {
        v.fill(0.0);
        v[q] = 1.0;
        scratch.clear();
        ElectricalSolution sol = esolver_.solve(v, &scratch, params_.cg_tol_electrical);
        for (int p = 0; p < kNumPorts; ++p)
            dev_cache_.G[p][q] = sol.port_current[p] - dev_cache_.b[p];
    }
    sigma_extract_ = sigma_iter_;
    have_extraction_ = true;
}

ElectricalSolution Engine::coupled_solve(const CircuitSources& src, bool& fp_converged,
                                         OperatingPoint& op_out) {
    fp_converged = false;
    sigma_iter_ = sigma_base_;
    ElectricalInputs in;
    in.sigma = &sigma_iter_;
    in.seebeck = &seebeck_;
    in.temperature = &state_.T;
    in.face_mult_x = face_mult_x_.empty() ? nullptr : &face_mult_x_;
    in.face_mult_y = face_mult_y_.empty() ? nullptr : &face_mult_y_;

    ElectricalSolution sol;
    std::array<double, kNumPorts> prev_i{};
    bool have_prev = false;
    for (int k = 0; k < std::max(1, params_.fp_max_iters); ++k) {
        esolver_.update(in);
        if (!have_extraction_ || sigma_drift() > params_.sigma_reextract_tol) extract_multiport();
        op_out = solve_network(circuit_, src, dev_cache_,
                               state_.op.node_v.empty() ? nullptr : &state_.op,
                               params_.newton_tol, params_.newton_max_iters);
        sol = esolver_.solve(op_out.port_v, &warm_V_, params_.cg_tol_electrical);

        // sigma(E) update at frozen T and CD.
        double dsigma = 0.0;
        for (int c : grid_.gst_cells) {
            double mix = std::clamp(state_.cd.norm1(c), 0.0, 1.0);
            double s = mat_.sigma(mix, state_.T[c], sol.E_mag[c], molten_[c] != 0);
            dsigma = std::max(dsigma, std::fabs(s - sigma_iter_[c]) / sigma_iter_[c]);
            sigma_iter_[c] = s;
        }
        double di = 0.0;
        if (have_prev) {
            double scale = 1e-12;
            for (int p = 0; p < kNumPorts; ++p)
                scale = std::max(scale, std::fabs(sol.port_current[p]));
            for (int p = 0; p < kNumPorts; ++p)
                di = std::max(di, std::fabs(sol.port_current[p] - prev_i[p]) / scale);
        }
        prev_i = sol.port_current;
        have_prev = true;
        if (dsigma < params_.fp_tol || (k > 0 && di < params_.fp_tol)) {
            fp_converged = true;
            break;
        }
    }
    return sol;
}

StepInfo Engine::step(const InstantDrive& drive, double dt_max) {
    if (!(dt_max > 0.0)) throw std::invalid_argument("step: dt_max must be positive");
    double dt = state_.dt_prev > 0.0 ? std::min(state_.dt_prev * params_.dt_growth, dt_max)
                                     : dt_max;
    dt = std::max(dt, std::min(params_.dt_min, dt_max));

    build_material_fields(state_.E_mag);
    build_face_multipliers();

    StepInfo info;

    for (;;) {
        bool fp_ok = true;
        OperatingPoint op;
        ElectricalSolution sol = coupled_solve(drive.sources, fp_ok, op);

        // Total heat source: face Joule + Thomson + lagged latent heat.
        q_total_.assign(grid_.cells(), 0.0);
        for (int c = 0; c < grid_.cells(); ++c)
            q_total_[c] = sol.joule[c] + sol.thomson[c] + state_.q_latent[c];

        ThermalResult th = tsolver_.step(state_.T, dt, q_total_, k_cell_, rho_cp_cell_,
                                         drive.boundary_T, &warm_T_, params_.cg_tol_thermal);

        double max_dT = 0.0;
        for (int j = 1; j < grid_.ny - 1; ++j)
            for (int i = 1; i < grid_.nx - 1; ++i) {
                int c = grid_.idx(i, j);
                max_dT = std::max(max_dT, std::fabs(th.T[c] - state_.T[c]));
            }
        if (max_dT > params_.max_dT && dt > params_.dt_min) {
            dt = std::max(0.5 * dt, params_.dt_min);
            ++info.retries;
            continue;
        }

        CDField cd_new = state_.cd;
        rate_step(cd_new, grid_, th.T, dt, rates_, seed_, state_.attempt_count, dnorm_dt_);
        ++state_.attempt_count;
        double max_dcd = 0.0;
        for (int c : grid_.gst_cells)
            max_dcd = std::max(max_dcd, std::fabs(dnorm_dt_[c]) * dt);
        if (max_dcd > params_.max_dCD && dt > params_.dt_min) {
            dt = std::max(0.5 * dt, params_.dt_min);
            ++info.retries;
            continue;
        }
        if (max_dT > params_.max_dT || max_dcd > params_.max_dCD)
            throw EngineAbort("dt underflow below the 1 ps floor (dT=" + std::to_string(max_dT) +
                              " K, dCD=" + std::to_string(max_dcd) + ")");

        // Accepted: energy audit, then commit.
        const double vol = grid_.cell_volume();
        info.audit.w_electrical = sol.dissipated_power * dt;
        info.audit.q_boundary = th.boundary_heat_W * dt;
        double dU = 0.0, qlat = 0.0;
        for (int j = 1; j < grid_.ny - 1; ++j)
            for (int i = 1; i < grid_.nx - 1; ++i) {
                int c = grid_.idx(i, j);
                dU += rho_cp_cell_[c] * vol * (th.T[c] - state_.T[c]);
                qlat += state_.q_latent[c] * vol * dt;
            }
        info.audit.dU = dU;
        info.audit.q_latent = qlat;
        info.dt = dt;
        info.max_dT = max_dT;
        info.max_dCD = max_dcd;
        info.fp_converged = fp_ok;

        state_.T = th.T;
        state_.cd = cd_new;
        state_.E_mag = sol.E_mag;
        for (int c = 0; c < grid_.cells(); ++c)
            state_.q_latent[c] =
                (dnorm_dt_[c] != 0.0) ? mat_.latent_heat_rate(dnorm_dt_[c], th.T[c]) : 0.0;
        state_.time += dt;
        state_.dt_prev = dt;
        ++state_.step_count;
        state_.energy_J += op.supply_power * dt;
        state_.op = op;
        last_port_i_ = sol.port_current;
        last_power_ = op.supply_power;
        return info;
    }
}

double Engine::corridor(int c1, int c2) const {
    return crystallinity_along_path(state_.cd, grid_, c1, c2);
}

Winner Engine::classify_state() const {
    double c12 = corridor(W1, W2);
    double c13 = corridor(W1, W3);
    bool b12 = c12 < 0.05, b13 = c13 < 0.05;
    if (b12 && b13) return Winner::Both;
    if (!b12 && !b13) return Winner::Neither;
    return b12 ? Winner::W12 : Winner::W13;
}

double Engine::path_resistance(int c1, int c2, double bias) const {
    if (c1 == c2) throw std::invalid_argument("path_resistance: contacts must be distinct");
    std::array<bool, kNumPorts> floating;
    floating.fill(true);
    floating[c1] = floating[c2] = false;

    const int n = grid_.cells();
    std::vector<double> sigma(n, 0.0), seebeck(n, 0.0);
    for (int c = 0; c < n; ++c) {
        if (grid_.material[c] == Material::Tin)
            sigma[c] = mat_.sigma_tin;
        else if (grid_.material[c] == Material::Gst) {
            double mix = std::clamp(state_.cd.norm1(c), 0.0, 1.0);
            bool molten = state_.T[c] > mat_.T_melt;
            sigma[c] = mat_.sigma(mix, state_.T[c], 0.0, molten);
            seebeck[c] = mat_.seebeck(mix, state_.T[c]);
        }
    }
    // Reuse the step path's face multipliers (depend on CD only).
    const_cast<Engine*>(this)->build_face_multipliers();

    ElectricalInputs in;
    in.sigma = &sigma;
    in.seebeck = &seebeck;
    in.temperature = &state_.T;
    in.face_mult_x = face_mult_x_.empty() ? nullptr : &face_mult_x_;
    in.face_mult_y = face_mult_y_.empty() ? nullptr : &face_mult_y_;

    ElectricalSolver solver(grid_, floating);
    solver.update(in);
    std::array<double, kNumPorts> v{};
    ElectricalSolution base = solver.solve(v, nullptr, params_.cg_tol_electrical);
    v[c1] = bias;
    ElectricalSolution sol = solver.solve(v, nullptr, params_.cg_tol_electrical);
    double di = sol.port_current[c1] - base.port_current[c1];
    if (di == 0.0) throw SolveError("path_resistance: no current at bias", 0.0);
    return bias / di;
}

Snapshot Engine::snapshot() const {
    Snapshot s;
    s.t = state_.time;
    s.cd = state_.cd;
    s.T = state_.T;
    s.V.assign(grid_.cells(), 0.0);
    s.sigma.assign(grid_.cells(), 0.0);
    for (int c = 0; c < grid_.cells(); ++c) {
        if (grid_.material[c] == Material::Tin)
            s.sigma[c] = mat_.sigma_tin;
        else if (grid_.material[c] == Material::Gst) {
            double mix = std::clamp(state_.cd.norm1(c), 0.0, 1.0);
            s.sigma[c] = mat_.sigma(mix, state_.T[c], state_.E_mag[c], state_.T[c] > mat_.T_melt);
        }
    }
    return s;
}

RunResult Engine::run(const Schedule& schedule) {
    RunResult res;
    const std::vector<double> bps = schedule.breakpoints();
    const std::vector<int> corr12 = corridor_cells(grid_, W1, W2);
    const std::vector<int> corr13 = corridor_cells(grid_, W1, W3);

    for (std::size_t w = 0; w < schedule.writes.size(); ++w) {
        WriteOutcome o;
        o.index = static_cast<int>(w);
        o.t_begin = schedule.writes[w].t0;
        o.t_end = schedule.writes[w].t1;
        res.writes.push_back(o);
    }
    std::vector<char> snap_done(schedule.snapshot_times.size(), 0);

    auto molten_on = [&](const std::vector<int>& cells) {
        for (int c : cells)
            if (grid_.material[c] == Material::Gst && state_.T[c] > mat_.T_melt) return true;
        return false;
    };
    auto max_gst_T = [&]() {
        double m = 0.0;
        for (int c : grid_.gst_cells) m = std::max(m, state_.T[c]);
        return m;
    };

    auto record_row = [&](const std::string& event) {
        TraceRow row;
        row.t = state_.time;
        row.i_w12 = -last_port_i_[W2];
        row.i_w13 = -last_port_i_[W3];
        row.q = state_.op.q;
        row.qbar = state_.op.qbar;
        row.y = state_.op.y;
        row.power = last_power_;
        row.energy = state_.energy_J;
        row.c12 = corridor(W1, W2);
        row.c13 = corridor(W1, W3);
        row.max_T = max_gst_T();
        row.event = event;
        res.trace.push_back(row);
    };
    if (res.trace.empty()) record_row("");

    const double eps = 1e-15;
    while (state_.time < schedule.t_end - eps) {
        double t = state_.time;
        auto it = std::upper_bound(bps.begin(), bps.end(), t + eps);
        double next_bp = (it != bps.end()) ? *it : schedule.t_end;
        double horizon = std::min(next_bp, schedule.t_end);
        bool active = schedule.any_active(t, horizon);
        double dt_cap = active ? params_.dt_max_active : params_.dt_max_idle;
        double dt_max = std::min(dt_cap, horizon - t);
        if (dt_max <= 0.0) break;

        double t_target = t + dt_max;
        InstantDrive drive;
        drive.sources.vdd = schedule.vdd;
        drive.sources.v_write = schedule.v_write.eval(t_target);
        drive.sources.v_read_gate = schedule.v_read_gate.eval(t_target);
        drive.sources.x1 = schedule.x1.eval(t_target);
        drive.sources.x2 = schedule.x2.eval(t_target);
        drive.boundary_T = schedule.boundary_T_at(t_target, mat_.T_ambient);

        StepInfo info;
        try {
            info = step(drive, dt_max);
        } catch (const EngineAbort& e) {
            throw EngineAbort(std::string(e.what()) + " at t=" +
                              std::to_string(state_.time * 1e9) + " ns");
        }
        res.max_audit_residual = std::max(res.max_audit_residual, info.audit.residual());
        if (!info.fp_converged) ++res.fp_fallbacks;

        // Event labels and write bookkeeping.
        std::string event;
        double now = state_.time;
        for (std::size_t w = 0; w < schedule.writes.size(); ++w) {
            const auto& win = schedule.writes[w];
            if (now > win.t0 && now <= win.t1 + eps) {
                event = "write:" + std::to_string(w);
                if (molten_on(corr12) && molten_on(corr13)) {
                    res.writes[w].both_molten_during = true;
                    event += "|both_molten";
                }
            }
        }
        for (std::size_t r = 0; r < schedule.reads.size(); ++r) {
            const auto& win = schedule.reads[r];
            if (now > win.t0 && now <= win.t1 + eps) {
                if (!event.empty()) event += "|";
                event += "read:" + std::to_string(r);
            }
        }
        if (schedule.boundary_T_at(now, mat_.T_ambient) > mat_.T_ambient + 0.5) {
            if (!event.empty()) event += "|";
            event += "anneal";
        }
        for (auto& o : res.writes) {
            if (!o.resolved && now > o.t_end && max_gst_T() < rates_.T_glass) {
                o.resolved = true;
                o.t_resolved = now;
                o.c12 = corridor(W1, W2);
                o.c13 = corridor(W1, W3);
                o.winner = classify_state();
                if (!event.empty()) event += "|";
                event += std::string("winner:") + winner_name(o.winner);
            }
        }
        for (std::size_t s = 0; s < schedule.snapshot_times.size(); ++s) {
            if (!snap_done[s] && now >= schedule.snapshot_times[s] - eps) {
                snap_done[s] = 1;
                res.snapshots.push_back(snapshot());
            }
        }
        record_row(event);
    }
    return res;
}

}  // namespace pcm
