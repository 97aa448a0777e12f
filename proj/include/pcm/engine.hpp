// SPDX-License-Identifier: Apache-2.0
//
// Coupled time stepping: circuit + electrical fixed point at frozen T/CD,
// implicit thermal step with Joule, Thomson and latent sources, then the
// phase rate step at the new temperature. Adaptive dt with halving retries,
// event bookkeeping and trace capture.

#ifndef PCM_ENGINE_HPP
#define PCM_ENGINE_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pcm/circuit.hpp"
#include "pcm/fields.hpp"
#include "pcm/materials.hpp"
#include "pcm/phase.hpp"

namespace pcm {

struct EngineParams {
    double dt_max_active = 0.1e-9;  // step cap while any source is live [s]
    double dt_max_idle = 1.0e-9;
    double dt_min = 0.25e-12;
    double max_dT = 25.0;     // K per accepted step
    double max_dCD = 0.2;     // crystallinity per accepted step
    double sigma_reextract_tol = 0.01;  // relative drift triggering re-extraction
    int fp_max_iters = 8;
    double fp_tol = 1e-4;     // relative port-current / sigma change
    double cg_tol_electrical = 1e-12;
    double cg_tol_thermal = 1e-10;
    double newton_tol = 1e-9;
    int newton_max_iters = 50;
    double dt_growth = 1.25;
};

enum class Winner { W12, W13, Both, Neither };
const char* winner_name(Winner w);

struct SimulationState {
    double time = 0.0;
    std::uint64_t step_count = 0;
    std::uint64_t attempt_count = 0;  // keys the phase RNG, counts retries too
    double dt_prev = 0.0;
    CDField cd;
    std::vector<double> T;
    std::vector<double> E_mag;
    std::vector<double> q_latent;  // lagged latent source [W/m^3]
    double energy_J = 0.0;         // cumulative source energy
    OperatingPoint op;             // last operating point (warm start)
};

// Sources and boundary at one instant, as the step integrator sees them.
struct InstantDrive {
    CircuitSources sources;
    double boundary_T = 293.0;
};

struct StepInfo {
    double dt = 0.0;
    int retries = 0;
    EnergyAudit audit;
    double max_dT = 0.0;
    double max_dCD = 0.0;
    bool fp_converged = true;
};

struct TraceRow {
    double t;
    double i_w12, i_w13;  // A, current leaving through W2 / W3
    double q, qbar, y;    // V
    double power;         // W (all rails)
    double energy;        // J cumulative
    double c12, c13;      // write-corridor crystallinity
    double max_T;         // peak GST temperature (not serialized)
    std::string event;
};

struct Snapshot {
    double t = 0.0;
    CDField cd;
    std::vector<double> T, V, sigma;
};

struct WriteOutcome {
    int index = 0;
    double t_begin = 0.0, t_end = 0.0;
    bool both_molten_during = false;
    bool resolved = false;
    double t_resolved = 0.0;
    double c12 = 1.0, c13 = 1.0;
    Winner winner = Winner::Neither;
};

struct Schedule {
    Waveform v_write;      // write FET gate
    Waveform v_read_gate;  // read FET gate (read enable)
    Waveform x1, x2;       // mux input rails
    double vdd = 3.0;      // write rail, constant while v_write is up

    struct AnnealInterval {
        double t0 = 0.0, duration = 0.0;
        double T = 550.0;
        double ramp = 5e-9;  // boundary temperature ramp time
    };
    std::vector<AnnealInterval> anneals;
    std::vector<double> snapshot_times;

    struct WriteWindow { double t0, t1; };
    std::vector<WriteWindow> writes;
    struct ReadWindow {
        double t0, t1;
        int after_write = -1;
        bool x1_high = false, x2_high = false;
    };
    std::vector<ReadWindow> reads;

    double t_end = 0.0;

    double boundary_T_at(double t, double ambient) const;
    bool any_active(double t0, double t1) const;
    std::vector<double> breakpoints() const;
};

struct RunResult {
    std::vector<TraceRow> trace;
    std::vector<WriteOutcome> writes;
    std::vector<Snapshot> snapshots;
    double max_audit_residual = 0.0;
    int fp_fallbacks = 0;  // fixed-point loops that hit the iteration cap
};

// Aborts carry the event context and leave the engine state at the last
// accepted step for diagnostics.
class EngineAbort : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Engine {
  public:
    Engine(const Grid& grid, const MaterialModel& mat, const PhaseRates& rates,
           const CircuitParams& circuit, const EngineParams& params, std::uint64_t seed);

    void reset(std::uint64_t seed, int n_grains = 12);
    const SimulationState& state() const { return state_; }
    SimulationState& mutable_state() { return state_; }
    void set_state(const SimulationState& s);
    const Grid& grid() const { return grid_; }

    // One adaptive step ending no later than time + dt_max.
    StepInfo step(const InstantDrive& drive, double dt_max);

    // Runs the schedule from the current state; deterministic per seed.
    RunResult run(const Schedule& schedule);

    // Corridor crystallinity of a write path in the current state.
    double corridor(int c1, int c2) const;

    // Classifies the device state: which write path is amorphized.
    Winner classify_state() const;

    // Small-signal two-port resistance through the device, other ports
    // floating, at the current material state (E = 0).
    double path_resistance(int c1, int c2, double bias = 0.01) const;

    Snapshot snapshot() const;

  private:
    const Grid& grid_;
    MaterialModel mat_;
    PhaseRates rates_;
    CircuitParams circuit_;
    EngineParams params_;
    std::uint64_t seed_ = 0;

    SimulationState state_;
    ElectricalSolver esolver_;
    ThermalSolver tsolver_;

    // Device multiport cache.
    bool have_extraction_ = false;
    DevicePort dev_cache_;
    std::vector<double> sigma_extract_;

    // Warm starts.
    std::vector<double> warm_V_, warm_T_;

    // Scratch fields rebuilt per step.
    std::vector<double> sigma_base_, sigma_iter_, seebeck_, k_cell_, rho_cp_cell_, q_total_;
    std::vector<double> face_mult_x_, face_mult_y_;
    std::vector<double> dnorm_dt_;
    std::vector<char> molten_;

    // Last accepted electrical solve, for the trace.
    std::array<double, kNumPorts> last_port_i_{};
    double last_power_ = 0.0;

    void build_material_fields(const std::vector<double>& E);
    void build_face_multipliers();
    double sigma_drift() const;
    void extract_multiport();
    ElectricalSolution coupled_solve(const CircuitSources& src, bool& fp_converged,
                                     OperatingPoint& op_out);
};

}  // namespace pcm

#endif
