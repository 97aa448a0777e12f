// SPDX-License-Identifier: Apache-2.0
//
// Structured 2D simulation domain: circular GST patch, six TiN contacts on
// the patch rim, oxide surround. Uniform Cartesian cells, staircase
// rasterization by cell-center test. Immutable after construction.

#ifndef PCM_GEOMETRY_HPP
#define PCM_GEOMETRY_HPP

#include <array>
#include <vector>

#include "pcm/types.hpp"

namespace pcm {

struct ContactSpec {
    int port = 0;            // Port enum value
    double angle_deg = 0.0;  // position on the GST rim, CCW from +x
};

struct DeviceGeometry {
    double gst_radius = 25e-9;
    double contact_radius = 10e-9;
    // Radial position of contact centers; 0 places them on the patch rim.
    double contact_center_radius = 0.0;
    double domain_half_width = 250e-9;
    double depth = 20e-9;  // out-of-plane thickness
    double center_radius() const {
        return contact_center_radius > 0.0 ? contact_center_radius : gst_radius;
    }
    // FIG-3 layout: W1 on top, write and read contacts alternating at 60deg.
    std::array<ContactSpec, kNumPorts> contacts{{{W1, 90.0},
                                                 {R3, 150.0},
                                                 {W3, 210.0},
                                                 {R1, 270.0},
                                                 {W2, 330.0},
                                                 {R2, 30.0}}};
};

struct Grid {
    int nx = 0, ny = 0;
    double h = 0.0;      // cell size [m]
    double depth = 0.0;  // out-of-plane depth [m]
    double half_width = 0.0;
    double gst_radius = 0.0;

    std::vector<Material> material;   // nx*ny
    std::vector<std::int8_t> contact; // nx*ny, -1 or port index
    std::array<std::array<double, 2>, kNumPorts> contact_center{};
    std::array<int, kNumPorts> contact_cell_count{};
    std::vector<int> gst_cells;  // flattened indices, row-major order

    int idx(int i, int j) const { return j * nx + i; }
    bool inside(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    bool outer_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
    }
    double x_of(int i) const { return (i + 0.5) * h - half_width; }
    double y_of(int j) const { return (j + 0.5) * h - half_width; }
    double cell_area() const { return h * h; }
    double cell_volume() const { return h * h * depth; }
    int cells() const { return nx * ny; }
    bool conductive(int c) const { return material[c] != Material::Oxide; }
};

// Rasterizes the device geometry at cell size h. Throws std::invalid_argument
// with a descriptive message on degenerate or unresolvable configurations.
Grid build_grid(const DeviceGeometry& geom, double h);

// Chord distance between two contact centers [m]. Throws on c1 == c2.
double path_length(const DeviceGeometry& geom, int c1, int c2);

// Cells crossed by the straight segment between two contact centers
// (supercover traversal); used by the corridor-crystallinity metric.
std::vector<int> corridor_cells(const Grid& grid, int c1, int c2);

}  // namespace pcm

#endif
