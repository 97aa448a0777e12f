// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "pcm/circuit.hpp"
#include "pcm/linsolve.hpp"

using namespace pcm;

namespace {
// Six-port with a single resistor R between ports a and b.
DevicePort two_port(int a, int b, double R) {
    DevicePort d{};
    d.G[a][a] = 1.0 / R;
    d.G[b][b] = 1.0 / R;
    d.G[a][b] = d.G[b][a] = -1.0 / R;
    return d;
}
}  // namespace

TEST_CASE("nfet cutoff, triode/saturation agreement, and C1 continuity") {
    NfetModel m;
    // Cutoff for forward operation; reverse vds re-references the gate to
    // the swapped source terminal, so it is covered by the swap check below.
    for (double vds : {0.0, 0.5, 2.0}) CHECK(nfet_current(m, 0.0, vds) == 0.0);

    // The two closed forms agree exactly at the branch point.
    double vgs = 1.7;
    double vov = vgs - m.vth;
    double triode = m.beta * (vov * vov - 0.5 * vov * vov) * (1.0 + m.lambda * vov);
    double sat = 0.5 * m.beta * vov * vov * (1.0 + m.lambda * vov);
    CHECK(triode == doctest::Approx(sat).epsilon(1e-14));
    CHECK(nfet_current(m, vgs, vov) == doctest::Approx(sat).epsilon(1e-14));

    // Numeric C1 check across the boundary.
    double eps = 1e-7;
    double below = (nfet_current(m, vgs, vov) - nfet_current(m, vgs, vov - eps)) / eps;
    double above = (nfet_current(m, vgs, vov + eps) - nfet_current(m, vgs, vov)) / eps;
    CHECK(below == doctest::Approx(above).epsilon(1e-4));

    // Antisymmetric terminal swap for vds < 0.
    CHECK(nfet_current(m, 2.0, -1.0) == doctest::Approx(-nfet_current(m, 3.0, 1.0)).epsilon(1e-14));

    // Analytic derivatives match finite differences in both regions.
    for (double vds : {0.3, 2.2, -0.8}) {
        double gm, gds;
        nfet_derivs(m, 2.0, vds, gm, gds);
        double fd_gm = (nfet_current(m, 2.0 + eps, vds) - nfet_current(m, 2.0 - eps, vds)) / (2 * eps);
        double fd_gds = (nfet_current(m, 2.0, vds + eps) - nfet_current(m, 2.0, vds - eps)) / (2 * eps);
        CHECK(gm == doctest::Approx(fd_gm).epsilon(1e-5));
        CHECK(gds == doctest::Approx(fd_gds).epsilon(1e-5));
    }
}

TEST_CASE("default sizing delivers roughly the write-path current scale") {
    NfetModel m;
    double i = nfet_current(m, 3.0, 2.0);
    CHECK(i > 150e-6);
    CHECK(i < 400e-6);
}

TEST_CASE("waveform evaluation is exact piecewise-linear") {
    Waveform w;
    w.pulses.push_back({10e-9, 3.0, 1e-9, 5e-9, 1e-9});
    CHECK(w.eval(5e-9) == 0.0);
    CHECK(w.eval(10.5e-9) == doctest::Approx(1.5));
    CHECK(w.eval(13e-9) == 3.0);
    CHECK(w.eval(16.5e-9) == doctest::Approx(1.5));
    CHECK(w.eval(18e-9) == 0.0);
    CHECK(w.active_in(0.0, 9e-9) == false);
    CHECK(w.active_in(0.0, 11e-9) == true);
    CHECK(w.end_time() == doctest::Approx(17e-9));
}

TEST_CASE("all sources at zero give the zero operating point") {
    CircuitParams p;
    DevicePort dev = two_port(R1, R2, 1e5);
    CircuitSources s{};
    OperatingPoint op = solve_network(p, s, dev);
    for (double v : op.node_v) CHECK(std::fabs(v) < 1e-12);
    CHECK(op.q == 0.0);
    CHECK(op.kcl_residual < 1e-9);
}

TEST_CASE("read divider matches the hand calculation with FETs as resistors") {
    CircuitParams p;
    p.gmin = 0.0;
    const double r_on = 2e3, r_dev = 1e5;
    p.fet_linear_resistance = r_on;
    p.r_load = 1e4;
    DevicePort dev = two_port(R1, R2, r_dev);
    CircuitSources s{};
    s.v_read_gate = 3.0;  // ignored in linear mode
    // Voltage divider: rail - r_on - device - r_on - R_L to ground.
    OperatingPoint op = solve_network(p, s, dev);
    double expect = p.v_read_rail * p.r_load / (p.r_load + 2.0 * r_on + r_dev);
    CHECK(op.q == doctest::Approx(expect).epsilon(1e-9));
    CHECK(std::fabs(op.qbar) < 1e-12);  // R3 port carries no device conductance
}

TEST_CASE("linear network solution equals an independent dense nodal solve") {
    // Flip-flop topology with every FET replaced by a resistor; assemble the
    // same nodal system densely and compare.
    CircuitParams p;
    p.gmin = 1e-12;
    p.fet_linear_resistance = 5e3;
    p.r_series_w2 = 500.0;
    p.r_series_w3 = 250.0;
    DevicePort dev{};
    // Symmetric random-ish resistor star: every port to every other.
    const double rstar[6] = {1e4, 2e4, 3e4, 4e4, 5e4, 6e4};
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
            if (a == b) continue;
            double gab = 1.0 / (rstar[a] + rstar[b]);
            dev.G[a][a] += gab;
            dev.G[a][b] -= gab;
        }
    CircuitSources s;
    s.vdd = 3.0;
    s.v_write = 3.0;
    s.v_read_gate = 1.0;
    s.x1 = 0.5;
    s.x2 = 0.0;
    OperatingPoint op = solve_network(p, s, dev);

    // Independent dense assembly of the same 9-node system.
    const int n = 9;
    const int nW1 = 0, nW2 = 1, nW3 = 2, nWG = 3, nR1 = 4, nR2 = 5, nR3 = 6, nQ = 7, nQb = 8;
    std::vector<double> A(n * n, 0.0), rhs(n, 0.0);
    auto stamp_r = [&](int a, int b, double r, double vb_fixed = 0.0, bool b_fixed = false) {
        double gg = 1.0 / r;
        A[a * n + a] += gg;
        if (b_fixed) {
            rhs[a] += gg * vb_fixed;
        } else {
            A[a * n + b] -= gg;
            A[b * n + a] -= gg;
            A[b * n + b] += gg;
        }
    };
    double rf = *p.fet_linear_resistance;
    stamp_r(nW1, -1, rf, s.vdd, true);          // write top FET to VDD rail
    stamp_r(nWG, -1, rf, 0.0, true);            // write bottom FET to ground
    stamp_r(nW2, nWG, p.r_series_w2);
    stamp_r(nW3, nWG, p.r_series_w3);
    stamp_r(nR1, -1, rf, p.v_read_rail, true);  // read rail FET
    stamp_r(nR2, nQ, rf);
    stamp_r(nR3, nQb, rf);
    stamp_r(nQ, -1, p.r_load, 0.0, true);
    stamp_r(nQb, -1, p.r_load, 0.0, true);
    int dev_node[6] = {nW1, nW2, nW3, nR1, nR2, nR3};
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) A[dev_node[a] * n + dev_node[b]] += dev.G[a][b];
    for (int k = 0; k < n; ++k) A[k * n + k] += p.gmin;
    dense_lu_solve(A, rhs, n);
    for (int k = 0; k < n; ++k) CHECK(op.node_v[k] == doctest::Approx(rhs[k]).epsilon(1e-9));
}

TEST_CASE("asymmetric read paths push Q and Qbar to opposite sides") {
    CircuitParams p;
    DevicePort dev{};
    // R1-R2 conductive (crystalline), R1-R3 nearly blocked (amorphous).
    auto add_r = [&](int a, int b, double R) {
        dev.G[a][a] += 1.0 / R;
        dev.G[b][b] += 1.0 / R;
        dev.G[a][b] -= 1.0 / R;
        dev.G[b][a] -= 1.0 / R;
    };
    add_r(R1, R2, 8e3);
    add_r(R1, R3, 5e6);
    CircuitSources s{};
    s.v_read_gate = 3.0;
    OperatingPoint op = solve_network(p, s, dev);
    CHECK(op.q > op.qbar);
    CHECK(op.q / std::max(op.qbar, 1e-12) > 10.0);
    double mid = 0.5 * (op.q + op.qbar);
    CHECK(op.q > mid);
    CHECK(op.qbar < mid);
}

TEST_CASE("newton failure reports the residual") {
    CircuitParams p;
    DevicePort dev = two_port(R1, R2, 1e5);
    CircuitSources s;
    s.vdd = 3.0;
    s.v_write = 3.0;
    CHECK_THROWS_AS(solve_network(p, s, dev, nullptr, 1e-9, 1), SolveError);
}
