// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "pcm/fields.hpp"
#include "pcm/rng.hpp"
#include "pcm/verify.hpp"

using namespace pcm;

namespace {
DeviceGeometry small_device() {
    DeviceGeometry g;
    g.gst_radius = 20e-9;
    g.contact_radius = 8e-9;
    g.domain_half_width = 80e-9;
    g.depth = 20e-9;
    return g;
}

struct DeviceFields {
    std::vector<double> sigma, seebeck, T;
    ElectricalInputs in(const Grid&) {
        ElectricalInputs i;
        i.sigma = &sigma;
        i.seebeck = &seebeck;
        i.temperature = &T;
        return i;
    }
};

DeviceFields uniform_fields(const Grid& g, double sigma_gst = 2e4) {
    DeviceFields f;
    f.sigma.assign(g.cells(), 0.0);
    f.seebeck.assign(g.cells(), 0.0);
    f.T.assign(g.cells(), 293.0);
    for (int c = 0; c < g.cells(); ++c) {
        if (g.material[c] == Material::Gst) f.sigma[c] = sigma_gst;
        if (g.material[c] == Material::Tin) f.sigma[c] = 1e6;
    }
    return f;
}
}  // namespace

TEST_CASE("uniform strip resistance matches the 1D analytic oracle within 1%") {
    for (const auto& r : verify_strip_resistance()) CHECK(r.pass);
}

TEST_CASE("equal port voltages give a constant potential and zero currents") {
    Grid g = build_grid(small_device(), 2e-9);
    DeviceFields f = uniform_fields(g);
    std::array<double, kNumPorts> v;
    v.fill(0.7);
    ElectricalSolver solver(g, std::array<bool, kNumPorts>{});
    solver.update(f.in(g));
    ElectricalSolution sol = solver.solve(v);
    for (int c = 0; c < g.cells(); ++c)
        if (g.conductive(c)) CHECK(sol.V[c] == doctest::Approx(0.7).epsilon(1e-10));
    for (int p = 0; p < kNumPorts; ++p)
        CHECK(std::fabs(sol.port_current[p]) < 1e-12);
}

TEST_CASE("halving the out-of-plane depth exactly halves port currents") {
    DeviceGeometry geom = small_device();
    Grid g20 = build_grid(geom, 2e-9);
    geom.depth = 10e-9;
    Grid g10 = build_grid(geom, 2e-9);
    DeviceFields f20 = uniform_fields(g20);
    DeviceFields f10 = uniform_fields(g10);
    std::array<double, kNumPorts> v{};
    v[W1] = 3.0;
    PortBC bc = PortBC::all_driven(v);
    ElectricalSolution a = solve_potential(g20, f20.in(g20), bc);
    ElectricalSolution b = solve_potential(g10, f10.in(g10), bc);
    for (int p = 0; p < kNumPorts; ++p)
        CHECK(b.port_current[p] == doctest::Approx(0.5 * a.port_current[p]).epsilon(1e-9));
}

TEST_CASE("kirchhoff sum vanishes and joule deposition matches port power") {
    Grid g = build_grid(small_device(), 2e-9);
    DeviceFields f = uniform_fields(g);
    for (std::size_t k = 0; k < g.gst_cells.size(); ++k)
        f.sigma[g.gst_cells[k]] = std::pow(10.0, 1.0 + 3.0 * uniform01(11, 0, k));
    std::array<double, kNumPorts> v{};
    for (int p = 0; p < kNumPorts; ++p) v[p] = uniform01(12, 0, p);
    ElectricalSolver solver(g, std::array<bool, kNumPorts>{});
    solver.update(f.in(g));
    ElectricalSolution sol = solver.solve(v);

    double sum = 0.0, scale = 0.0;
    for (int p = 0; p < kNumPorts; ++p) {
        sum += sol.port_current[p];
        scale = std::max(scale, std::fabs(sol.port_current[p]));
    }
    CHECK(std::fabs(sum) / scale < 1e-9);

    double joule = 0.0;
    for (int c = 0; c < g.cells(); ++c) joule += sol.joule[c] * g.cell_volume();
    CHECK(joule == doctest::Approx(sol.dissipated_power).epsilon(1e-9));
    // With S = 0 the Thomson field is identically zero.
    for (int c = 0; c < g.cells(); ++c) CHECK(sol.thomson[c] == 0.0);
}

TEST_CASE("thomson deposition sums to zero with thermoelectrics enabled") {
    Grid g = build_grid(small_device(), 2e-9);
    DeviceFields f = uniform_fields(g);
    for (int c = 0; c < g.cells(); ++c) {
        int i = c % g.nx;
        f.T[c] = 293.0 + 2.0 * i;  // imposed gradient
        if (g.material[c] == Material::Gst) f.seebeck[c] = 3e-4;
    }
    std::array<double, kNumPorts> v{};
    v[W1] = 1.0;
    ElectricalSolver solver(g, std::array<bool, kNumPorts>{});
    solver.update(f.in(g));
    ElectricalSolution sol = solver.solve(v);
    double net = 0.0, scale = 1e-30;
    for (int c = 0; c < g.cells(); ++c) {
        net += sol.thomson[c] * g.cell_volume();
        scale = std::max(scale, std::fabs(sol.thomson[c]) * g.cell_volume());
    }
    CHECK(std::fabs(net) / scale < 1e-9);
    // The Seebeck drive moves the port currents.
    std::vector<double> t0(g.cells(), 293.0);
    DeviceFields flat = f;
    flat.T = t0;
    solver.update(flat.in(g));
    ElectricalSolution base = solver.solve(v);
    CHECK(sol.port_current[W1] != base.port_current[W1]);
}

TEST_CASE("floating contacts form equipotential supernodes with zero net current") {
    Grid g = build_grid(small_device(), 2e-9);
    DeviceFields f = uniform_fields(g);
    PortBC bc;
    bc.v[W1] = 1.0;
    bc.v[W2] = 0.0;  // others float
    ElectricalSolution sol = solve_potential(g, f.in(g), bc);
    for (int p : {W3, R1, R2, R3}) {
        CHECK(std::fabs(sol.port_current[p]) < 1e-12);
        CHECK(sol.port_voltage[p] > 0.0);
        CHECK(sol.port_voltage[p] < 1.0);
    }
}

TEST_CASE("a contactless conductive island is flagged and grounded") {
    Grid g = build_grid(small_device(), 2e-9);
    // Carve an isolated GST blob in the oxide far from the device.
    for (int j = 2; j < 5; ++j)
        for (int i = 2; i < 5; ++i) g.material[g.idx(i, j)] = Material::Gst;
    g.gst_cells.clear();
    for (int c = 0; c < g.cells(); ++c)
        if (g.material[c] == Material::Gst) g.gst_cells.push_back(c);

    DeviceFields f = uniform_fields(g);
    std::array<double, kNumPorts> v{};
    v[W1] = 1.0;
    ElectricalSolver solver(g, std::array<bool, kNumPorts>{});
    solver.update(f.in(g));
    ElectricalSolution sol = solver.solve(v);
    CHECK(sol.flagged_island_cells == 9);
    CHECK(std::fabs(sol.V[g.idx(3, 3)]) < 1e-6);  // leaked to ground
}

TEST_CASE("thermal step holds equilibrium exactly") {
    Grid g = build_grid(small_device(), 2e-9);
    std::vector<double> T(g.cells(), 293.0), q(g.cells(), 0.0);
    std::vector<double> k(g.cells(), 1.0), c(g.cells(), 1.3e6);
    ThermalSolver solver(g);
    ThermalResult r = solver.step(T, 1e-10, q, k, c, 293.0);
    for (int i = 0; i < g.cells(); ++i) CHECK(r.T[i] == doctest::Approx(293.0).epsilon(1e-12));
    CHECK(std::fabs(r.boundary_heat_W) < 1e-12);
}

TEST_CASE("a hot spot relaxes monotonically and obeys the maximum principle") {
    Grid g = build_grid(small_device(), 2e-9);
    std::vector<double> T(g.cells(), 293.0), q(g.cells(), 0.0);
    std::vector<double> k(g.cells(), 1.0), cp(g.cells(), 1.3e6);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double r2 = std::pow(g.x_of(i), 2) + std::pow(g.y_of(j), 2);
            T[g.idx(i, j)] = 293.0 + 400.0 * std::exp(-r2 / (2e-17));
        }
    ThermalSolver solver(g);
    double prev_excess = 1e300;
    for (int s = 0; s < 30; ++s) {
        ThermalResult r = solver.step(T, 2e-11, q, k, cp, 293.0);
        double excess = 0.0, tmax = 0.0;
        for (int c = 0; c < g.cells(); ++c) {
            excess += (r.T[c] - 293.0);
            tmax = std::max(tmax, r.T[c]);
        }
        CHECK(excess < prev_excess);
        CHECK(tmax <= 693.0 + 1e-9);
        CHECK(r.T[g.idx(g.nx / 2, g.ny / 2)] >= 293.0 - 1e-9);
        prev_excess = excess;
        T = r.T;
    }
}

TEST_CASE("1D transient matches the erfc similarity solution within 2%") {
    for (const auto& r : verify_heat_erfc()) CHECK(r.pass);
}

TEST_CASE("implicit step conserves energy against the boundary-flux report") {
    Grid g = build_grid(small_device(), 2e-9);
    std::vector<double> T(g.cells(), 293.0), q(g.cells(), 0.0);
    std::vector<double> k(g.cells(), 1.2), cp(g.cells(), 1.5e6);
    for (int c : g.gst_cells) q[c] = 5e15;  // W/m^3 heater
    ThermalSolver solver(g);
    double dt = 5e-11;
    ThermalResult r = solver.step(T, dt, q, k, cp,
                                  std::array<double, 4>{293.0, 293.0, 293.0, 293.0}, nullptr,
                                  1e-13);
    double dU = 0.0, qin = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            int c = g.idx(i, j);
            dU += cp[c] * g.cell_volume() * (r.T[c] - T[c]);
            qin += q[c] * g.cell_volume() * dt;
        }
    double residual = std::fabs(dU - (qin - r.boundary_heat_W * dt)) /
                      std::max({std::fabs(dU), qin, 1e-30});
    CHECK(residual < 1e-8);
}

TEST_CASE("energy audit residual is zero for an idle step") {
    EnergyAudit a;
    CHECK(a.residual() == 0.0);
    a.dU = 1e-15;
    a.w_electrical = 1e-15;
    CHECK(a.residual() < 1e-9);
}
