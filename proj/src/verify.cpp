// SPDX-License-Identifier: Apache-2.0

#include "pcm/verify.hpp"

#include <cmath>

#include "pcm/fields.hpp"
#include "pcm/harness.hpp"
#include "pcm/rng.hpp"

namespace pcm {

namespace {

VerifyResult make_result(const std::string& name, double value, double limit,
                         const std::string& detail = "") {
    return {name, value <= limit, value, limit, detail};
}

// Rectangular conductor with ideal end contacts, hand-built masks.
Grid make_strip_grid() {
    Grid g;
    g.nx = 130;
    g.ny = 20;
    g.h = 1e-9;
    g.depth = 20e-9;
    g.half_width = 0.5 * g.nx * g.h;
    g.gst_radius = 0.0;
    g.material.assign(static_cast<std::size_t>(g.nx) * g.ny, Material::Oxide);
    g.contact.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);
    for (int j = 8; j < 12; ++j) {
        for (int i = 5; i < 125; ++i) {
            int c = g.idx(i, j);
            if (i < 10) {
                g.material[c] = Material::Tin;
                g.contact[c] = W1;
            } else if (i >= 120) {
                g.material[c] = Material::Tin;
                g.contact[c] = W2;
            } else {
                g.material[c] = Material::Gst;
                g.gst_cells.push_back(c);
            }
        }
    }
    return g;
}

}  // namespace

std::vector<VerifyResult> verify_strip_resistance() {
    Grid g = make_strip_grid();
    const double sigma_gst = 2.0e4, sigma_tin = 1.0e6;
    std::vector<double> sigma(g.cells(), 0.0), seebeck(g.cells(), 0.0), T(g.cells(), 293.0);
    for (int c = 0; c < g.cells(); ++c) {
        if (g.material[c] == Material::Gst) sigma[c] = sigma_gst;
        if (g.material[c] == Material::Tin) sigma[c] = sigma_tin;
    }
    ElectricalInputs in;
    in.sigma = &sigma;
    in.seebeck = &seebeck;
    in.temperature = &T;
    PortBC bc;
    bc.v[W1] = 1.0;
    bc.v[W2] = 0.0;
    ElectricalSolution sol = solve_potential(g, in, bc);

    const double length = 110.0 * g.h;             // GST span between contacts
    const double area = 4.0 * g.h * g.depth;       // strip cross-section
    const double i_ref = sigma_gst * area / length;  // at 1 V
    double err = std::fabs(sol.port_current[W1] - i_ref) / i_ref;
    return {make_result("strip-resistance", err, 0.01,
                        "I=" + std::to_string(sol.port_current[W1] * 1e6) + " uA vs analytic " +
                            std::to_string(i_ref * 1e6) + " uA")};
}

std::vector<VerifyResult> verify_heat_erfc() {
    Grid g;
    g.nx = 400;
    g.ny = 5;
    g.h = 1e-9;
    g.depth = 20e-9;
    g.half_width = 0.5 * g.nx * g.h;
    g.material.assign(static_cast<std::size_t>(g.nx) * g.ny, Material::Gst);
    g.contact.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);

    const double k = 1.0, rho_cp = 1.302e6;
    const double alpha = k / rho_cp;
    std::vector<double> kf(g.cells(), k), cf(g.cells(), rho_cp), q(g.cells(), 0.0);
    std::vector<double> T(g.cells(), 293.0);

    ThermalSolver solver(g, ThermalBc{true, true, false, false});
    const double T_hot = 400.0, T_amb = 293.0;
    const std::array<double, 4> edges{T_hot, T_amb, 0.0, 0.0};

    const double dt = 5e-12;
    struct Probe {
        int i;
        double t;
    };
    const Probe probes[3] = {{30, 2e-9}, {50, 5e-9}, {80, 10e-9}};

    std::vector<VerifyResult> out;
    std::vector<double> warm;
    double t = 0.0;
    int done = 0;
    const int jmid = 2;
    while (done < 3) {
        ThermalResult r = solver.step(T, dt, q, kf, cf, edges, &warm, 1e-12);
        T = r.T;
        t += dt;
        for (const Probe& p : probes) {
            if (std::fabs(t - p.t) < 0.5 * dt) {
                double x = p.i * g.h;  // from the Dirichlet cell centers
                double ref = (T_hot - T_amb) * std::erfc(x / (2.0 * std::sqrt(alpha * t)));
                double num = T[g.idx(p.i, jmid)] - T_amb;
                double err = std::fabs(num - ref) / ref;
                out.push_back(make_result(
                    "heat-erfc-x" + std::to_string(p.i) + "nm", err, 0.02,
                    "dT=" + std::to_string(num) + " K vs erfc " + std::to_string(ref) + " K"));
                ++done;
            }
        }
    }
    return out;
}

std::vector<VerifyResult> verify_kirchhoff(const Config& cfg, int n_fields) {
    Grid g = cfg.make_grid();
    ElectricalSolver solver(g, std::array<bool, kNumPorts>{});
    std::vector<double> sigma(g.cells(), 0.0), seebeck(g.cells(), 0.0), T(g.cells(), 293.0);
    for (int c = 0; c < g.cells(); ++c)
        if (g.material[c] == Material::Tin) sigma[c] = 1e6;

    double worst = 0.0;
    for (int trial = 0; trial < n_fields; ++trial) {
        for (std::size_t k = 0; k < g.gst_cells.size(); ++k) {
            double u = uniform01(99, trial, k);
            sigma[g.gst_cells[k]] = std::pow(10.0, 5.0 * u);  // 1 .. 1e5 S/m
        }
        std::array<double, kNumPorts> v{};
        for (int p = 0; p < kNumPorts; ++p)
            v[p] = 2.0 * uniform01(77, trial, p) - 1.0;
        ElectricalInputs in;
        in.sigma = &sigma;
        in.seebeck = &seebeck;
        in.temperature = &T;
        solver.update(in);
        ElectricalSolution sol = solver.solve(v);
        double sum = 0.0, scale = 0.0;
        for (int p = 0; p < kNumPorts; ++p) {
            sum += sol.port_current[p];
            scale = std::max(scale, std::fabs(sol.port_current[p]));
        }
        if (scale > 0.0) worst = std::max(worst, std::fabs(sum) / scale);
    }
    return {make_result("kirchhoff-random-sigma", worst, 1e-9,
                        std::to_string(n_fields) + " random fields")};
}

std::vector<VerifyResult> verify_superposition(const Config& cfg) {
    Grid g = cfg.make_grid();
    ElectricalSolver solver(g, std::array<bool, kNumPorts>{});
    std::vector<double> sigma(g.cells(), 0.0), seebeck(g.cells(), 0.0), T(g.cells(), 293.0);
    for (int c = 0; c < g.cells(); ++c)
        if (g.material[c] == Material::Tin) sigma[c] = 1e6;
    for (std::size_t k = 0; k < g.gst_cells.size(); ++k)
        sigma[g.gst_cells[k]] = std::pow(10.0, 1.0 + 3.0 * uniform01(5, 0, k));
    ElectricalInputs in;
    in.sigma = &sigma;
    in.seebeck = &seebeck;
    in.temperature = &T;
    solver.update(in);

    std::array<double, kNumPorts> va{}, vb{}, vab{}, v2a{};
    for (int p = 0; p < kNumPorts; ++p) {
        va[p] = 2.0 * uniform01(6, 0, p) - 1.0;
        vb[p] = 2.0 * uniform01(6, 1, p) - 1.0;
        vab[p] = va[p] + vb[p];
        v2a[p] = 2.0 * va[p];
    }
    ElectricalSolution sa = solver.solve(va);
    ElectricalSolution sb = solver.solve(vb);
    ElectricalSolution sab = solver.solve(vab);
    ElectricalSolution s2a = solver.solve(v2a);

    double scale = 0.0;
    for (int p = 0; p < kNumPorts; ++p)
        scale = std::max({scale, std::fabs(sab.port_current[p]), std::fabs(s2a.port_current[p])});
    double err_sum = 0.0, err_lin = 0.0;
    for (int p = 0; p < kNumPorts; ++p) {
        err_sum = std::max(err_sum, std::fabs(sab.port_current[p] - sa.port_current[p] -
                                              sb.port_current[p]) / scale);
        err_lin = std::max(err_lin,
                           std::fabs(s2a.port_current[p] - 2.0 * sa.port_current[p]) / scale);
    }
    return {make_result("superposition", err_sum, 1e-9),
            make_result("linearity-scaling", err_lin, 1e-9)};
}

std::vector<VerifyResult> verify_energy_audit(const Config& cfg) {
    Config c = cfg;
    c.experiment.thermalize_ns = 30.0;
    Grid grid = c.make_grid();
    Engine eng(grid, c.materials, c.phase, c.circuit, c.engine, c.experiment.seed);
    eng.reset(c.experiment.seed, c.experiment.n_grains);
    ScheduleBuilder sb(c);
    int w = sb.add_write();
    sb.space_after_write(w);
    RunResult run = eng.run(sb.finish());
    return {make_result("energy-audit-write-cycle", run.max_audit_residual, 1e-3,
                        std::to_string(run.trace.size()) + " steps")};
}

std::vector<VerifyResult> run_verification(const Config& cfg) {
    std::vector<VerifyResult> all;
    for (auto&& group :
         {verify_strip_resistance(), verify_heat_erfc(), verify_kirchhoff(cfg),
          verify_superposition(cfg), verify_energy_audit(cfg)})
        all.insert(all.end(), group.begin(), group.end());
    return all;
}

}  // namespace pcm
