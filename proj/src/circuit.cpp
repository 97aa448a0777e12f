// SPDX-License-Identifier: Apache-2.0

#include "pcm/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pcm/linsolve.hpp"

namespace pcm {

namespace {
// Square-law branches for vds >= 0; callers handle the terminal swap.
void square_law(const NfetModel& m, double vgs, double vds, double& id, double& dgs, double& dds) {
    double vov = vgs - m.vth;
    if (vov <= 0.0) {
        id = dgs = dds = 0.0;
        return;
    }
    double clm = 1.0 + m.lambda * vds;
    if (vds < vov) {
        double core = vov * vds - 0.5 * vds * vds;
        id = m.beta * core * clm;
        dgs = m.beta * vds * clm;
        dds = m.beta * (vov - vds) * clm + m.beta * core * m.lambda;
    } else {
        double core = 0.5 * vov * vov;
        id = m.beta * core * clm;
        dgs = m.beta * vov * clm;
        dds = m.beta * core * m.lambda;
    }
}
}  // namespace

double nfet_current(const NfetModel& m, double vgs, double vds) {
    double id, a, b;
    if (vds >= 0.0) {
        square_law(m, vgs, vds, id, a, b);
        return id;
    }
    square_law(m, vgs - vds, -vds, id, a, b);
    return -id;
}

void nfet_derivs(const NfetModel& m, double vgs, double vds, double& gm, double& gds) {
    double id;
    if (vds >= 0.0) {
        square_law(m, vgs, vds, id, gm, gds);
        return;
    }
    double iu, iw;
    square_law(m, vgs - vds, -vds, id, iu, iw);
    gm = -iu;
    gds = iu + iw;
}

double Waveform::eval(double t) const {
    double v = 0.0;
    for (const Pulse& p : pulses) {
        if (t <= p.t0 || t >= p.end()) continue;
        double dt = t - p.t0;
        if (dt < p.rise)
            v += p.amplitude * (p.rise > 0.0 ? dt / p.rise : 1.0);
        else if (dt < p.rise + p.width)
            v += p.amplitude;
        else {
            double df = dt - p.rise - p.width;
            v += p.amplitude * (p.fall > 0.0 ? 1.0 - df / p.fall : 0.0);
        }
    }
    return v;
}

bool Waveform::active_in(double t0, double t1) const {
    for (const Pulse& p : pulses)
        if (p.t0 < t1 && p.end() > t0 && p.amplitude != 0.0) return true;
    return false;
}

double Waveform::end_time() const {
    double e = 0.0;
    for (const Pulse& p : pulses) e = std::max(e, p.end());
    return e;
}

namespace {

struct Fet {
    const NfetModel* model;
    int drain_node;   // -1 -> fixed rail
    int source_node;  // -1 -> ground
    double drain_rail = 0.0;
    double gate_v = 0.0;
    double rail_power_v = 0.0;  // voltage of the source this branch draws from
    double id = 0.0;            // filled during evaluation
};

struct Resistor {
    int a_node, b_node;  // -1 -> ground
    double r;
};

struct Topology {
    int n_nodes = 0;
    int dev_node[kNumPorts];  // node index per device port
    std::vector<Fet> fets;
    std::vector<Resistor> resistors;
    int out_q = -1, out_qbar = -1, out_y = -1;
};

Topology build_topology(const CircuitParams& p, const CircuitSources& s) {
    Topology t;
    const double r_floor = 1e-3;  // keeps zero-ohm trims solvable
    // Shared write side: W1 fed from VDD, W2/W3 trimmed into a common node
    // grounded through one FET.
    const int nW1 = 0, nW2 = 1, nW3 = 2, nWG = 3, nR1 = 4, nR2 = 5, nR3 = 6;
    t.dev_node[W1] = nW1;
    t.dev_node[W2] = nW2;
    t.dev_node[W3] = nW3;
    t.dev_node[R1] = nR1;
    t.dev_node[R2] = nR2;
    t.dev_node[R3] = nR3;
    t.fets.push_back({&p.write_fet, -1, nW1, s.vdd, s.v_write, s.vdd});
    t.fets.push_back({&p.write_fet, nWG, -1, 0.0, s.v_write, 0.0});
    t.resistors.push_back({nW2, nWG, std::max(p.r_series_w2, r_floor)});
    t.resistors.push_back({nW3, nWG, std::max(p.r_series_w3, r_floor)});

    if (p.variant == CircuitVariant::FlipFlop) {
        const int nQ = 7, nQb = 8;
        t.n_nodes = 9;
        t.fets.push_back({&p.read_fet, -1, nR1, p.v_read_rail, s.v_read_gate, p.v_read_rail});
        t.fets.push_back({&p.read_fet, nR2, nQ, 0.0, s.v_read_gate, 0.0});
        t.fets.push_back({&p.read_fet, nR3, nQb, 0.0, s.v_read_gate, 0.0});
        t.resistors.push_back({nQ, -1, p.r_load});
        t.resistors.push_back({nQb, -1, p.r_load});
        t.out_q = nQ;
        t.out_qbar = nQb;
    } else {
        const int nY = 7;
        t.n_nodes = 8;
        t.fets.push_back({&p.read_fet, -1, nR2, s.x1, s.v_read_gate, s.x1});
        t.fets.push_back({&p.read_fet, -1, nR3, s.x2, s.v_read_gate, s.x2});
        t.fets.push_back({&p.read_fet, nR1, nY, 0.0, s.v_read_gate, 0.0});
        t.resistors.push_back({nY, -1, p.r_mux});
        t.out_y = nY;
    }
    return t;
}

}  // namespace

OperatingPoint solve_network(const CircuitParams& p, const CircuitSources& s,
                             const DevicePort& dev, const OperatingPoint* warm, double tol,
                             int max_iter) {
    Topology t = build_topology(p, s);
    const int n = t.n_nodes;

    std::vector<double> x(n, 0.0);
    if (warm && static_cast<int>(warm->node_v.size()) == n) x = warm->node_v;

    auto node_v = [&](const std::vector<double>& v, int node) {
        return node < 0 ? 0.0 : v[node];
    };

    // Residual (sum of currents leaving each node) and optional Jacobian.
    auto evaluate = [&](const std::vector<double>& v, std::vector<double>& f,
                        std::vector<double>* jac) {
        std::fill(f.begin(), f.end(), 0.0);
        if (jac) std::fill(jac->begin(), jac->end(), 0.0);
        auto addj = [&](int r, int c, double val) {
            if (r >= 0 && c >= 0) (*jac)[r * n + c] += val;
        };

        for (Fet& fet : t.fets) {
            double vd = fet.drain_node < 0 ? fet.drain_rail : v[fet.drain_node];
            double vs = node_v(v, fet.source_node);
            double id, gm, gds;
            if (p.fet_linear_resistance) {
                id = (vd - vs) / *p.fet_linear_resistance;
                gm = 0.0;
                gds = 1.0 / *p.fet_linear_resistance;
            } else {
                id = nfet_current(*fet.model, fet.gate_v - vs, vd - vs);
                nfet_derivs(*fet.model, fet.gate_v - vs, vd - vs, gm, gds);
            }
            fet.id = id;
            if (fet.drain_node >= 0) f[fet.drain_node] += id;
            if (fet.source_node >= 0) f[fet.source_node] -= id;
            if (jac) {
                addj(fet.drain_node, fet.drain_node, gds);
                addj(fet.drain_node, fet.source_node, -gm - gds);
                addj(fet.source_node, fet.drain_node, -gds);
                addj(fet.source_node, fet.source_node, gm + gds);
            }
        }
        for (const Resistor& r : t.resistors) {
            double i = (node_v(v, r.a_node) - node_v(v, r.b_node)) / r.r;
            if (r.a_node >= 0) f[r.a_node] += i;
            if (r.b_node >= 0) f[r.b_node] -= i;
            if (jac) {
                addj(r.a_node, r.a_node, 1.0 / r.r);
                addj(r.a_node, r.b_node, -1.0 / r.r);
                addj(r.b_node, r.a_node, -1.0 / r.r);
                addj(r.b_node, r.b_node, 1.0 / r.r);
            }
        }
        // Device: affine six-port, current positive into the device.
        for (int a = 0; a < kNumPorts; ++a) {
            double i = dev.b[a];
            for (int q = 0; q < kNumPorts; ++q) i += dev.G[a][q] * v[t.dev_node[q]];
            f[t.dev_node[a]] += i;
            if (jac)
                for (int q = 0; q < kNumPorts; ++q) addj(t.dev_node[a], t.dev_node[q], dev.G[a][q]);
        }
        for (int k = 0; k < n; ++k) {
            f[k] += p.gmin * v[k];
            if (jac) (*jac)[k * n + k] += p.gmin;
        }
    };

    std::vector<double> f(n), jac(n * n), fnew(n), xtrial(n);
    auto norm2 = [](const std::vector<double>& v) {
        double s2 = 0.0;
        for (double a : v) s2 += a * a;
        return std::sqrt(s2);
    };
    auto norm_inf = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::fabs(a));
        return m;
    };

    evaluate(x, f, nullptr);
    int it = 0;
    for (; it < max_iter; ++it) {
        if (norm_inf(f) < tol) break;
        evaluate(x, f, &jac);
        std::vector<double> rhs(n);
        for (int k = 0; k < n; ++k) rhs[k] = -f[k];
        std::vector<double> jcopy = jac;
        dense_lu_solve(jcopy, rhs, n);

        double f0 = norm2(f);
        double alpha = 1.0;
        for (int bt = 0; bt < 12; ++bt) {
            for (int k = 0; k < n; ++k) xtrial[k] = x[k] + alpha * rhs[k];
            evaluate(xtrial, fnew, nullptr);
            if (norm2(fnew) < f0 || alpha < 1e-3) break;
            alpha *= 0.5;
        }
        x = xtrial;
        f = fnew;
    }
    if (norm_inf(f) >= tol)
        throw SolveError("circuit Newton did not converge", norm_inf(f));

    OperatingPoint op;
    op.node_v = x;
    op.newton_iterations = it;
    op.kcl_residual = norm_inf(f);
    for (int q = 0; q < kNumPorts; ++q) op.port_v[q] = x[t.dev_node[q]];
    for (int a = 0; a < kNumPorts; ++a) {
        double i = dev.b[a];
        for (int q = 0; q < kNumPorts; ++q) i += dev.G[a][q] * op.port_v[q];
        op.port_i[a] = i;
    }
    if (t.out_q >= 0) op.q = x[t.out_q];
    if (t.out_qbar >= 0) op.qbar = x[t.out_qbar];
    if (t.out_y >= 0) op.y = x[t.out_y];

    // Power delivered by the rails: re-evaluate once so fet.id is consistent.
    evaluate(x, f, nullptr);
    op.supply_power = 0.0;
    for (const Fet& fet : t.fets)
        if (fet.drain_node < 0) op.supply_power += fet.rail_power_v * fet.id;
    return op;
}

}  // namespace pcm
