// SPDX-License-Identifier: Apache-2.0

#include "pcm/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcm {

namespace {

double harmonic(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return 2.0 * a * b / (a + b);
}

// Locate CSR entry (i, j); the pattern is fixed so this runs once per slot.
int csr_entry(const SparseSpd& a, int i, int j) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
        if (a.col[k] == j) return k;
    throw std::logic_error("missing CSR entry");
}

void check_field_sizes(const Grid& grid, const ElectricalInputs& in) {
    if (!in.sigma || !in.seebeck || !in.temperature)
        throw std::invalid_argument("electrical inputs incomplete");
    const auto n = static_cast<std::size_t>(grid.cells());
    if (in.sigma->size() != n || in.seebeck->size() != n || in.temperature->size() != n)
        throw std::invalid_argument("electrical input field size mismatch");
    if (in.face_mult_x && in.face_mult_x->size() != n)
        throw std::invalid_argument("face multiplier size mismatch");
    if (in.face_mult_y && in.face_mult_y->size() != n)
        throw std::invalid_argument("face multiplier size mismatch");
}

}  // namespace

int ElectricalSolver::unknown_of(int cell) const { return umap_[cell]; }

ElectricalSolver::ElectricalSolver(const Grid& grid, const std::array<bool, kNumPorts>& floating)
    : grid_(grid), floating_(floating) {
    build_pattern();
}

void ElectricalSolver::build_pattern() {
    const Grid& g = grid_;
    umap_.assign(g.cells(), -1);
    float_unknown_.fill(-1);
    n_unknowns_ = 0;

    // Regular unknowns: conductive cells that are not part of a contact.
    std::array<bool, kNumPorts> has_cells{};
    for (int c = 0; c < g.cells(); ++c)
        if (g.contact[c] >= 0) has_cells[g.contact[c]] = true;
    for (int c = 0; c < g.cells(); ++c) {
        if (!g.conductive(c)) continue;
        int p = g.contact[c];
        if (p < 0)
            umap_[c] = n_unknowns_++;
        else if (floating_[p])
            umap_[c] = -10;  // resolved to the supernode below
        else
            umap_[c] = -(2 + p);
    }
    for (int p = 0; p < kNumPorts; ++p)
        if (floating_[p] && has_cells[p]) float_unknown_[p] = n_unknowns_++;
    for (int c = 0; c < g.cells(); ++c)
        if (umap_[c] == -10) umap_[c] = float_unknown_[g.contact[c]];

    // Faces between conductive cells.
    faces_.clear();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            int c = g.idx(i, j);
            if (!g.conductive(c)) continue;
            if (i + 1 < g.nx && g.conductive(g.idx(i + 1, j)))
                faces_.push_back({c, g.idx(i + 1, j), 0.0, 0.0, 0.0});
            if (j + 1 < g.ny && g.conductive(g.idx(i, j + 1)))
                faces_.push_back({c, g.idx(i, j + 1), 0.0, 0.0, 0.0});
        }
    }

    // Conductive components with no contact anywhere cannot be solved;
    // they are flagged and grounded through a weak leak.
    island_cell_.assign(g.cells(), 0);
    {
        std::vector<char> vis(g.cells(), 0);
        std::vector<int> stack;
        for (int c = 0; c < g.cells(); ++c)
            if (g.conductive(c) && g.contact[c] >= 0 && !vis[c]) {
                vis[c] = 1;
                stack.push_back(c);
            }
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            int i = c % g.nx, j = c / g.nx;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                int ii = i + di[k], jj = j + dj[k];
                if (!g.inside(ii, jj)) continue;
                int cc = g.idx(ii, jj);
                if (!g.conductive(cc) || vis[cc]) continue;
                vis[cc] = 1;
                stack.push_back(cc);
            }
        }
        flagged_island_cells_ = 0;
        for (int c = 0; c < g.cells(); ++c)
            if (g.conductive(c) && !vis[c]) {
                island_cell_[c] = 1;
                ++flagged_island_cells_;
            }
    }

    SpdBuilder builder(n_unknowns_);
    for (int u = 0; u < n_unknowns_; ++u) builder.add(u, u, 0.0);
    for (const Face& f : faces_) {
        int ua = unknown_of(f.a), ub = unknown_of(f.b);
        if (ua >= 0 && ub >= 0 && ua != ub) builder.add(ua, ub, 0.0);
    }
    a_ = builder.assemble();

    diag_entry_.assign(n_unknowns_, -1);
    for (int u = 0; u < n_unknowns_; ++u) diag_entry_[u] = csr_entry(a_, u, u);
    entry_of_face_aa_.assign(faces_.size(), -1);
    entry_of_face_bb_.assign(faces_.size(), -1);
    entry_of_face_ab_.assign(faces_.size(), -1);
    entry_of_face_ba_.assign(faces_.size(), -1);
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        int ua = unknown_of(faces_[k].a), ub = unknown_of(faces_[k].b);
        if (ua >= 0) entry_of_face_aa_[k] = diag_entry_[ua];
        if (ub >= 0) entry_of_face_bb_[k] = diag_entry_[ub];
        if (ua >= 0 && ub >= 0 && ua != ub) {
            entry_of_face_ab_[k] = csr_entry(a_, ua, ub);
            entry_of_face_ba_[k] = csr_entry(a_, ub, ua);
        }
    }
}

void ElectricalSolver::update(const ElectricalInputs& in) {
    check_field_sizes(grid_, in);
    in_ = in;
    const Grid& g = grid_;
    std::fill(a_.val.begin(), a_.val.end(), 0.0);

    double gsum = 0.0;
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        Face& f = faces_[k];
        double mult = 1.0;
        bool xface = (f.b == f.a + 1);
        if (xface && in.face_mult_x) mult = (*in.face_mult_x)[f.a];
        if (!xface && in.face_mult_y) mult = (*in.face_mult_y)[f.a];
        // 2D conductance: sigma * (h*depth)/h = sigma * depth.
        f.g = harmonic((*in.sigma)[f.a], (*in.sigma)[f.b]) * g.depth * mult;
        f.s = 0.5 * ((*in.seebeck)[f.a] + (*in.seebeck)[f.b]);
        f.dT = (*in.temperature)[f.a] - (*in.temperature)[f.b];
        gsum += f.g;

        int ua = unknown_of(f.a), ub = unknown_of(f.b);
        if (ua >= 0 && ua == ub) continue;  // same floating supernode
        if (ua >= 0) a_.val[entry_of_face_aa_[k]] += f.g;
        if (ub >= 0) a_.val[entry_of_face_bb_[k]] += f.g;
        if (ua >= 0 && ub >= 0) {
            a_.val[entry_of_face_ab_[k]] -= f.g;
            a_.val[entry_of_face_ba_[k]] -= f.g;
        }
    }
    // Weak ground for flagged islands keeps the system definite.
    island_leak_ = faces_.empty() ? 1e-12 : 1e-12 * gsum / static_cast<double>(faces_.size());
    for (int c = 0; c < g.cells(); ++c)
        if (island_cell_[c] && umap_[c] >= 0) a_.val[diag_entry_[umap_[c]]] += island_leak_;

    prec_.emplace(a_);
}

ElectricalSolution ElectricalSolver::solve(const std::array<double, kNumPorts>& port_voltage,
                                           std::vector<double>* warm, double rel_tol) const {
    if (!prec_) throw std::logic_error("ElectricalSolver::solve before update");
    const Grid& g = grid_;

    std::vector<double> rhs(n_unknowns_, 0.0);
    auto dirichlet_v = [&](int cell) { return port_voltage[g.contact[cell]]; };

    for (const Face& f : faces_) {
        int ua = unknown_of(f.a), ub = unknown_of(f.b);
        if (ua >= 0 && ua == ub) continue;
        double emf = f.g * f.s * f.dT;  // thermoelectric drive along the face
        if (ua >= 0) rhs[ua] -= emf;
        if (ub >= 0) rhs[ub] += emf;
        if (ua < 0 && ub >= 0) rhs[ub] += f.g * dirichlet_v(f.a);
        if (ub < 0 && ua >= 0) rhs[ua] += f.g * dirichlet_v(f.b);
    }

    std::vector<double> x;
    if (warm && static_cast<int>(warm->size()) == n_unknowns_)
        x = *warm;
    else
        x.assign(n_unknowns_, 0.0);
    CgResult cg = solve_pcg(a_, *prec_, rhs, x, rel_tol);
    if (warm) *warm = x;

    ElectricalSolution sol;
    sol.cg_iterations = cg.iterations;
    sol.flagged_island_cells = flagged_island_cells_;
    sol.V.assign(g.cells(), 0.0);
    for (int c = 0; c < g.cells(); ++c) {
        if (!g.conductive(c)) continue;
        int u = umap_[c];
        sol.V[c] = (u >= 0) ? x[u] : dirichlet_v(c);
    }
    for (int p = 0; p < kNumPorts; ++p)
        sol.port_voltage[p] =
            floating_[p] ? (float_unknown_[p] >= 0 ? x[float_unknown_[p]] : 0.0) : port_voltage[p];

    // Face currents -> port currents, Joule and Thomson deposition, field.
    sol.port_current.fill(0.0);
    sol.joule.assign(g.cells(), 0.0);
    sol.thomson.assign(g.cells(), 0.0);
    sol.E_mag.assign(g.cells(), 0.0);
    std::vector<double> ex(g.cells(), 0.0), ey(g.cells(), 0.0);
    std::vector<int> exn(g.cells(), 0), eyn(g.cells(), 0);
    const double vol = g.cell_volume();

    for (const Face& f : faces_) {
        double dV = sol.V[f.a] - sol.V[f.b];
        double flux = f.g * (dV + f.s * f.dT);  // A, positive a -> b

        int pa = g.contact[f.a], pb = g.contact[f.b];
        if (pa >= 0 && pa == pb) continue;  // interior of one contact
        if (pa >= 0) sol.port_current[pa] += flux;
        if (pb >= 0) sol.port_current[pb] -= flux;

        double pf = flux * dV;  // face Joule power [W]
        sol.joule[f.a] += 0.5 * pf / vol;
        sol.joule[f.b] += 0.5 * pf / vol;

        // -div(J S T) with face-upwinded S*T.
        double st = flux >= 0.0 ? (*in_.seebeck)[f.a] * (*in_.temperature)[f.a]
                                : (*in_.seebeck)[f.b] * (*in_.temperature)[f.b];
        sol.thomson[f.a] -= flux * st / vol;
        sol.thomson[f.b] += flux * st / vol;

        bool xface = (f.b == f.a + 1);
        double grad = dV / g.h;
        if (xface) {
            ex[f.a] += grad;
            ex[f.b] += grad;
            ++exn[f.a];
            ++exn[f.b];
        } else {
            ey[f.a] += grad;
            ey[f.b] += grad;
            ++eyn[f.a];
            ++eyn[f.b];
        }
    }
    for (int c = 0; c < g.cells(); ++c) {
        if (!g.conductive(c)) continue;
        double gx = exn[c] ? ex[c] / exn[c] : 0.0;
        double gy = eyn[c] ? ey[c] / eyn[c] : 0.0;
        sol.E_mag[c] = std::hypot(gx, gy);
    }
    sol.dissipated_power = 0.0;
    for (int p = 0; p < kNumPorts; ++p)
        sol.dissipated_power += sol.port_voltage[p] * sol.port_current[p];
    return sol;
}

ElectricalSolution solve_potential(const Grid& grid, const ElectricalInputs& in, const PortBC& bc,
                                   double rel_tol) {
    std::array<bool, kNumPorts> floating{};
    std::array<double, kNumPorts> volts{};
    for (int p = 0; p < kNumPorts; ++p) {
        floating[p] = !bc.v[p].has_value();
        volts[p] = bc.v[p].value_or(0.0);
        if (bc.v[p] && !std::isfinite(*bc.v[p]))
            throw std::invalid_argument("non-finite port voltage");
    }
    ElectricalSolver solver(grid, floating);
    solver.update(in);
    return solver.solve(volts, nullptr, rel_tol);
}

ThermalSolver::ThermalSolver(const Grid& grid, ThermalBc bc) : grid_(grid), bc_(bc) {
    const Grid& g = grid_;
    umap_.assign(g.cells(), -1);
    edge_of_.assign(g.cells(), -1);
    n_ = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            int c = g.idx(i, j);
            int edge = -1;
            if (bc_.left && i == 0) edge = 0;
            else if (bc_.right && i == g.nx - 1) edge = 1;
            else if (bc_.bottom && j == 0) edge = 2;
            else if (bc_.top && j == g.ny - 1) edge = 3;
            edge_of_[c] = edge;
            if (edge < 0) {
                umap_[c] = n_++;
                ucell_.push_back(c);
            }
        }
    if (n_ == g.cells()) throw std::invalid_argument("thermal problem needs a Dirichlet edge");

    SpdBuilder builder(n_);
    for (int u = 0; u < n_; ++u) builder.add(u, u, 0.0);
    faces_.clear();
    rim_faces_.clear();
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            int c = g.idx(i, j);
            if (i + 1 < g.nx) record_face(builder, c, g.idx(i + 1, j));
            if (j + 1 < g.ny) record_face(builder, c, g.idx(i, j + 1));
        }
    }
    a_ = builder.assemble();
    diag_entry_.assign(n_, -1);
    for (int u = 0; u < n_; ++u) diag_entry_[u] = csr_entry(a_, u, u);
    for (Face& f : faces_) {
        int ua = umap_[f.a], ub = umap_[f.b];
        f.ea_aa = ua >= 0 ? diag_entry_[ua] : -1;
        f.ea_bb = ub >= 0 ? diag_entry_[ub] : -1;
        if (ua >= 0 && ub >= 0) {
            f.ea_ab = csr_entry(a_, ua, ub);
            f.ea_ba = csr_entry(a_, ub, ua);
        } else {
            f.ea_ab = f.ea_ba = -1;
        }
    }
}

void ThermalSolver::record_face(SpdBuilder& builder, int a, int b) {
    int ua = umap_[a], ub = umap_[b];
    if (ua < 0 && ub < 0) return;  // rim-rim face carries no unknowns
    faces_.push_back({a, b, -1, -1, -1, -1});
    if (ua >= 0 && ub >= 0) builder.add(ua, ub, 0.0);
    if (ua >= 0 && ub < 0) rim_faces_.emplace_back(a, b);
    if (ub >= 0 && ua < 0) rim_faces_.emplace_back(b, a);
}

ThermalResult ThermalSolver::step(const std::vector<double>& T, double dt,
                                  const std::vector<double>& q, const std::vector<double>& k_cell,
                                  const std::vector<double>& rho_cp_cell,
                                  const std::array<double, 4>& edge_T, std::vector<double>* warm,
                                  double rel_tol) {
    const Grid& g = grid_;
    if (!(dt > 0.0)) throw std::invalid_argument("thermal step: dt must be positive");
    const auto nc = static_cast<std::size_t>(g.cells());
    if (T.size() != nc || q.size() != nc || k_cell.size() != nc || rho_cp_cell.size() != nc)
        throw std::invalid_argument("thermal step: field size mismatch");
    for (double v : q)
        if (!std::isfinite(v)) throw std::invalid_argument("thermal step: non-finite source");

    const double vol = g.cell_volume();
    std::fill(a_.val.begin(), a_.val.end(), 0.0);
    std::vector<double> rhs(n_, 0.0);
    auto dirichlet_T = [&](int cell) { return edge_T[edge_of_[cell]]; };

    for (int u = 0; u < n_; ++u) {
        int c = ucell_[u];
        double cap = rho_cp_cell[c] * vol / dt;
        a_.val[diag_entry_[u]] += cap;
        rhs[u] += cap * T[c] + q[c] * vol;
    }
    for (const Face& f : faces_) {
        double gf = harmonic(k_cell[f.a], k_cell[f.b]) * g.depth;
        int ua = umap_[f.a], ub = umap_[f.b];
        if (ua >= 0) a_.val[f.ea_aa] += gf;
        if (ub >= 0) a_.val[f.ea_bb] += gf;
        if (ua >= 0 && ub >= 0) {
            a_.val[f.ea_ab] -= gf;
            a_.val[f.ea_ba] -= gf;
        } else if (ua >= 0) {
            rhs[ua] += gf * dirichlet_T(f.b);
        } else {
            rhs[ub] += gf * dirichlet_T(f.a);
        }
    }

    IncompleteCholesky prec(a_);
    std::vector<double> x;
    if (warm && static_cast<int>(warm->size()) == n_)
        x = *warm;
    else {
        x.assign(n_, 0.0);
        for (int u = 0; u < n_; ++u) x[u] = T[ucell_[u]];
    }
    CgResult cg = solve_pcg(a_, prec, rhs, x, rel_tol);
    if (warm) *warm = x;

    ThermalResult out;
    out.cg_iterations = cg.iterations;
    out.T.assign(nc, 0.0);
    for (int c = 0; c < g.cells(); ++c)
        out.T[c] = (umap_[c] >= 0) ? x[umap_[c]] : dirichlet_T(c);

    out.boundary_heat_W = 0.0;
    for (const auto& [uc, rc] : rim_faces_) {
        double gf = harmonic(k_cell[uc], k_cell[rc]) * g.depth;
        out.boundary_heat_W += gf * (out.T[uc] - dirichlet_T(rc));
    }
    return out;
}

double EnergyAudit::residual() const {
    double mismatch = std::fabs(dU - (w_electrical + q_latent - q_boundary));
    double scale = std::max({std::fabs(dU), std::fabs(w_electrical), std::fabs(q_latent),
                             std::fabs(q_boundary)});
    if (scale < 1e-18) return 0.0;
    return mismatch / scale;
}

}  // namespace pcm
