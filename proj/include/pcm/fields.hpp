// SPDX-License-Identifier: Apache-2.0
//
// Quasi-static electrical solve (current continuity with the thermoelectric
// drive) and transient thermal step (backward Euler) on the structured grid.
// Cell-centered finite volumes with harmonic-mean face conductivities; the
// out-of-plane depth multiplies every conductance, capacity and current.

#ifndef PCM_FIELDS_HPP
#define PCM_FIELDS_HPP

#include <array>
#include <optional>
#include <vector>

#include "pcm/geometry.hpp"
#include "pcm/linsolve.hpp"

namespace pcm {

// Per-contact boundary condition: a driven port holds its rasterized
// footprint at one potential; a disengaged (nullopt) port floats as a single
// equipotential unknown.
struct PortBC {
    std::array<std::optional<double>, kNumPorts> v{};
    static PortBC all_driven(const std::array<double, kNumPorts>& volts) {
        PortBC bc;
        for (int p = 0; p < kNumPorts; ++p) bc.v[p] = volts[p];
        return bc;
    }
};

struct ElectricalSolution {
    std::vector<double> V;      // per cell; 0 in oxide
    std::vector<double> E_mag;  // |grad V| per cell [V/m]
    std::array<double, kNumPorts> port_current{};  // A, positive into device
    std::array<double, kNumPorts> port_voltage{};  // resolved (incl. floating)
    std::vector<double> joule;    // W/m^3, per cell
    std::vector<double> thomson;  // W/m^3, per cell (sums to ~0)
    double dissipated_power = 0.0;  // sum over ports of V*I [W]
    int cg_iterations = 0;
    int flagged_island_cells = 0;
};

// Per-cell material inputs for one electrical solve. Face multipliers (grain
// boundary penalty) are optional; empty means 1 everywhere.
struct ElectricalInputs {
    const std::vector<double>* sigma = nullptr;    // S/m, conductive cells
    const std::vector<double>* seebeck = nullptr;  // V/K
    const std::vector<double>* temperature = nullptr;  // K
    const std::vector<double>* face_mult_x = nullptr;  // idx(i,j): face (i,j)-(i+1,j)
    const std::vector<double>* face_mult_y = nullptr;  // idx(i,j): face (i,j)-(i,j+1)
};

// Reusable solver: the sparsity pattern and unknown numbering depend only on
// the grid and on which ports float, so one instance serves many solves.
class ElectricalSolver {
  public:
    ElectricalSolver(const Grid& grid, const std::array<bool, kNumPorts>& floating);

    // Refill conductances from new material state; invalidates the factor.
    void update(const ElectricalInputs& in);

    // Solve for the given driven-port voltages (floating entries ignored).
    // `warm` may carry the previous solution of the same pattern.
    ElectricalSolution solve(const std::array<double, kNumPorts>& port_voltage,
                             std::vector<double>* warm = nullptr, double rel_tol = 1e-12) const;

    int unknowns() const { return n_unknowns_; }
    int flagged_island_cells() const { return flagged_island_cells_; }

  private:
    const Grid& grid_;
    std::array<bool, kNumPorts> floating_{};
    // unknown index per cell: >=0 unknown, -1 oxide, -(2+p) Dirichlet port p
    std::vector<int> umap_;
    std::array<int, kNumPorts> float_unknown_{};
    int n_unknowns_ = 0;
    int flagged_island_cells_ = 0;
    double island_leak_ = 0.0;  // S, diagonal ground for contactless islands
    std::vector<char> island_cell_;

    struct Face {
        int a, b;        // cell indices, a < b in memory order
        double g = 0.0;  // conductance [S] incl. depth and multiplier
        double s = 0.0;  // face Seebeck [V/K]
        double dT = 0.0; // T_a - T_b
    };
    std::vector<Face> faces_;
    ElectricalInputs in_{};

    SparseSpd a_;
    std::vector<int> entry_of_face_aa_, entry_of_face_bb_, entry_of_face_ab_, entry_of_face_ba_;
    std::vector<int> diag_entry_;
    std::optional<IncompleteCholesky> prec_;

    int unknown_of(int cell) const;
    void build_pattern();
};

// One-call convenience wrapper matching the module contract.
ElectricalSolution solve_potential(const Grid& grid, const ElectricalInputs& in, const PortBC& bc,
                                   double rel_tol = 1e-12);

struct ThermalResult {
    std::vector<double> T;
    double boundary_heat_W = 0.0;  // conduction out through the Dirichlet rim
    int cg_iterations = 0;
};

// Which outer edges carry Dirichlet cells. Edges not listed are adiabatic
// (their cells become regular unknowns). The device uses all four.
struct ThermalBc {
    bool left = true, right = true, bottom = true, top = true;
};

// Backward-Euler step of d*Cp dT/dt = div(k grad T) + q with Dirichlet edge
// temperatures. Reusable: pattern built once per grid and edge set.
class ThermalSolver {
  public:
    explicit ThermalSolver(const Grid& grid, ThermalBc bc = {});

    // edge_T order: left, right, bottom, top (unused entries ignored).
    ThermalResult step(const std::vector<double>& T, double dt, const std::vector<double>& q,
                       const std::vector<double>& k_cell, const std::vector<double>& rho_cp_cell,
                       const std::array<double, 4>& edge_T, std::vector<double>* warm = nullptr,
                       double rel_tol = 1e-10);
    ThermalResult step(const std::vector<double>& T, double dt, const std::vector<double>& q,
                       const std::vector<double>& k_cell, const std::vector<double>& rho_cp_cell,
                       double boundary_T, std::vector<double>* warm = nullptr,
                       double rel_tol = 1e-10) {
        return step(T, dt, q, k_cell, rho_cp_cell,
                    std::array<double, 4>{boundary_T, boundary_T, boundary_T, boundary_T}, warm,
                    rel_tol);
    }

  private:
    const Grid& grid_;
    ThermalBc bc_;
    std::vector<int> umap_;      // -1 Dirichlet rim, else unknown index
    std::vector<int> edge_of_;   // 0..3 for Dirichlet cells, -1 otherwise
    std::vector<int> ucell_;
    int n_ = 0;
    SparseSpd a_;
    std::vector<int> diag_entry_;
    struct Face {
        int a, b;
        int ea_aa, ea_bb, ea_ab, ea_ba;  // CSR entry slots (-1 if Dirichlet side)
    };
    std::vector<Face> faces_;
    std::vector<std::pair<int, int>> rim_faces_;  // (unknown cell, rim cell)

    void record_face(SpdBuilder& builder, int a, int b);
};

// Relative energy-balance residual for one step:
//   | dU - (W_electrical + Q_latent - Q_boundary) | / max(|terms|)
// All quantities in joules for the step.
struct EnergyAudit {
    double dU = 0.0;
    double w_electrical = 0.0;
    double q_latent = 0.0;
    double q_boundary = 0.0;
    double residual() const;
};

}  // namespace pcm

#endif
