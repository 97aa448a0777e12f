// SPDX-License-Identifier: Apache-2.0
//
// Access network around the six-port device: square-law nFETs, load
// resistors, trapezoidal pulse sources, and a damped-Newton nodal solver.
// Within one engine step the device enters as an affine six-port
// I = G*V + b extracted from the field solver.

#ifndef PCM_CIRCUIT_HPP
#define PCM_CIRCUIT_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pcm/types.hpp"

namespace pcm {

struct NfetModel {
    double vth = 0.5;     // V
    double beta = 1.55e-4; // A/V^2; sized so the write path peaks near the table current
    double lambda = 0.05; // 1/V channel-length modulation
};

// Drain current, antisymmetric in drain/source exchange for vds < 0.
double nfet_current(const NfetModel& m, double vgs, double vds);
// d(Id)/d(vgs) and d(Id)/d(vds) for the Newton Jacobian.
void nfet_derivs(const NfetModel& m, double vgs, double vds, double& gm, double& gds);

// Trapezoidal pulse train over a zero baseline.
struct Waveform {
    struct Pulse {
        double t0 = 0.0;         // ramp start [s]
        double amplitude = 0.0;  // V
        double rise = 1e-9, width = 5e-9, fall = 1e-9;
        double end() const { return t0 + rise + width + fall; }
    };
    std::vector<Pulse> pulses;

    double eval(double t) const;
    bool active_in(double t0, double t1) const;  // nonzero anywhere in [t0, t1]
    double end_time() const;
};

enum class CircuitVariant { FlipFlop, Mux };

struct CircuitParams {
    CircuitVariant variant = CircuitVariant::FlipFlop;
    NfetModel write_fet;
    NfetModel read_fet;
    double r_load = 1.0e4;     // flip-flop R_L at R2/R3
    double r_mux = 1.0e4;      // mux output resistor at R1
    double r_series_w2 = 500.0;  // write-path trim resistors
    double r_series_w3 = 0.0;
    double v_read_rail = 0.5;  // read drive level (Table-style 0.5 V)
    double gmin = 1e-12;       // S, node-to-ground leak for off states
    // When set, every FET is replaced by this linear resistance (test oracle
    // for the dense-linear equivalence property).
    std::optional<double> fet_linear_resistance;
};

// Source values at one instant.
struct CircuitSources {
    double vdd = 0.0;        // write supply rail
    double v_write = 0.0;    // write FET gates
    double v_read_gate = 0.0;  // read FET gates (read enable)
    double x1 = 0.0, x2 = 0.0; // mux inputs (rails behind the X FETs)
};

// Affine six-port device model at frozen material state.
struct DevicePort {
    std::array<std::array<double, kNumPorts>, kNumPorts> G{};  // S
    std::array<double, kNumPorts> b{};                         // A at V=0
};

struct OperatingPoint {
    std::array<double, kNumPorts> port_v{};
    std::array<double, kNumPorts> port_i{};  // into device, from the affine model
    double q = 0.0, qbar = 0.0, y = 0.0;     // outputs across the read resistors
    double supply_power = 0.0;               // W delivered by all sources
    double kcl_residual = 0.0;               // A, max node residual
    int newton_iterations = 0;
    std::vector<double> node_v;              // warm-start storage
};

// Solves the nodal equations to |KCL| < tol at every node. Throws SolveError
// after max_iter damped iterations.
OperatingPoint solve_network(const CircuitParams& p, const CircuitSources& s,
                             const DevicePort& dev, const OperatingPoint* warm = nullptr,
                             double tol = 1e-9, int max_iter = 50);

}  // namespace pcm

#endif
