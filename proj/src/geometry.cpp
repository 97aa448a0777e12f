// SPDX-License-Identifier: Apache-2.0

#include "pcm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcm {

namespace {
constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }
}  // namespace

double path_length(const DeviceGeometry& geom, int c1, int c2) {
    if (c1 == c2) throw std::invalid_argument("path_length: contacts must be distinct");
    double a1 = 0.0, a2 = 0.0;
    bool f1 = false, f2 = false;
    for (const auto& c : geom.contacts) {
        if (c.port == c1) {
            a1 = deg2rad(c.angle_deg);
            f1 = true;
        }
        if (c.port == c2) {
            a2 = deg2rad(c.angle_deg);
            f2 = true;
        }
    }
    if (!f1 || !f2) throw std::invalid_argument("path_length: unknown contact id");
    double r = geom.center_radius();
    double dx = r * (std::cos(a1) - std::cos(a2));
    double dy = r * (std::sin(a1) - std::sin(a2));
    return std::hypot(dx, dy);
}

Grid build_grid(const DeviceGeometry& geom, double h) {
    if (!(geom.gst_radius > 0.0))
        throw std::invalid_argument("geometry: gst_radius must be positive");
    if (!(geom.contact_radius > 0.0))
        throw std::invalid_argument("geometry: contact_radius must be positive");
    if (!(geom.depth > 0.0)) throw std::invalid_argument("geometry: depth must be positive");
    if (!(h > 0.0)) throw std::invalid_argument("geometry: cell size must be positive");
    if (h > geom.contact_radius / 4.0)
        throw std::invalid_argument(
            "geometry: cell size " + std::to_string(h * 1e9) +
            " nm too coarse; need h <= contact_radius/4 = " +
            std::to_string(geom.contact_radius / 4.0 * 1e9) + " nm");
    if (geom.domain_half_width < geom.gst_radius + geom.contact_radius)
        throw std::invalid_argument("geometry: domain does not contain the device");

    // Six contacts, one per port, no duplicates.
    std::array<bool, kNumPorts> seen{};
    for (const auto& c : geom.contacts) {
        if (c.port < 0 || c.port >= kNumPorts)
            throw std::invalid_argument("geometry: contact port out of range");
        if (seen[c.port])
            throw std::invalid_argument(std::string("geometry: duplicate contact role ") +
                                        port_name(c.port));
        seen[c.port] = true;
    }

    Grid g;
    g.h = h;
    g.depth = geom.depth;
    g.half_width = geom.domain_half_width;
    g.gst_radius = geom.gst_radius;
    g.nx = g.ny = std::max(3, static_cast<int>(std::llround(2.0 * geom.domain_half_width / h)));
    g.material.assign(static_cast<std::size_t>(g.nx) * g.ny, Material::Oxide);
    g.contact.assign(static_cast<std::size_t>(g.nx) * g.ny, -1);

    const double rc = geom.center_radius();
    for (const auto& c : geom.contacts) {
        double a = deg2rad(c.angle_deg);
        g.contact_center[c.port] = {rc * std::cos(a), rc * std::sin(a)};
    }

    // Contacts must not overlap and must touch the patch rim.
    for (int p = 0; p < kNumPorts; ++p) {
        for (int q = p + 1; q < kNumPorts; ++q) {
            double dx = g.contact_center[p][0] - g.contact_center[q][0];
            double dy = g.contact_center[p][1] - g.contact_center[q][1];
            if (std::hypot(dx, dy) < 2.0 * geom.contact_radius)
                throw std::invalid_argument(std::string("geometry: contacts ") + port_name(p) +
                                            " and " + port_name(q) + " overlap");
        }
        double rc = std::hypot(g.contact_center[p][0], g.contact_center[p][1]);
        if (std::fabs(rc - geom.gst_radius) >= geom.contact_radius)
            throw std::invalid_argument(std::string("geometry: contact ") + port_name(p) +
                                        " does not intersect the GST patch boundary");
    }

    const double r2_gst = geom.gst_radius * geom.gst_radius;
    const double r2_con = geom.contact_radius * geom.contact_radius;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x_of(i), y = g.y_of(j);
            int c = g.idx(i, j);
            if (x * x + y * y <= r2_gst) g.material[c] = Material::Gst;
            for (int p = 0; p < kNumPorts; ++p) {
                double dx = x - g.contact_center[p][0], dy = y - g.contact_center[p][1];
                if (dx * dx + dy * dy <= r2_con) {
                    g.material[c] = Material::Tin;
                    g.contact[c] = static_cast<std::int8_t>(p);
                    break;  // overlap already excluded above
                }
            }
        }
    }

    g.contact_cell_count.fill(0);
    for (int c = 0; c < g.cells(); ++c)
        if (g.contact[c] >= 0) ++g.contact_cell_count[g.contact[c]];
    for (int p = 0; p < kNumPorts; ++p)
        if (g.contact_cell_count[p] == 0)
            throw std::invalid_argument(std::string("geometry: contact ") + port_name(p) +
                                        " rasterizes to no cells");

    for (int c = 0; c < g.cells(); ++c)
        if (g.material[c] == Material::Gst) g.gst_cells.push_back(c);
    if (g.gst_cells.empty()) throw std::invalid_argument("geometry: no GST cells");

    // Rasterized patch area vs pi r^2 (discretization sanity, contacts count
    // toward the patch disk since they carve into it).
    std::size_t disk_cells = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x_of(i), y = g.y_of(j);
            if (x * x + y * y <= r2_gst) ++disk_cells;
        }
    double raster_area = static_cast<double>(disk_cells) * h * h;
    double exact_area = kPi * r2_gst;
    if (std::fabs(raster_area - exact_area) > 0.05 * exact_area)
        throw std::invalid_argument("geometry: rasterized patch area off by more than 5%");

    // No orphan GST cells: flood fill from the cell nearest the center.
    {
        std::vector<char> vis(g.cells(), 0);
        int start = -1;
        double best = 1e300;
        for (int c : g.gst_cells) {
            int i = c % g.nx, j = c / g.nx;
            double d2 = g.x_of(i) * g.x_of(i) + g.y_of(j) * g.y_of(j);
            if (d2 < best) {
                best = d2;
                start = c;
            }
        }
        std::vector<int> stack{start};
        vis[start] = 1;
        std::size_t reached = 0;
        while (!stack.empty()) {
            int c = stack.back();
            stack.pop_back();
            ++reached;
            int i = c % g.nx, j = c / g.nx;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                int ii = i + di[k], jj = j + dj[k];
                if (!g.inside(ii, jj)) continue;
                int cc = g.idx(ii, jj);
                if (vis[cc] || g.material[cc] != Material::Gst) continue;
                vis[cc] = 1;
                stack.push_back(cc);
            }
        }
        if (reached != g.gst_cells.size())
            throw std::invalid_argument("geometry: disconnected GST cells in rasterization");
    }

    // Every contact must border GST so it can inject current.
    for (int p = 0; p < kNumPorts; ++p) {
        bool touches = false;
        for (int j = 0; j < g.ny && !touches; ++j)
            for (int i = 0; i < g.nx && !touches; ++i) {
                if (g.contact[g.idx(i, j)] != p) continue;
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    int ii = i + di[k], jj = j + dj[k];
                    if (g.inside(ii, jj) && g.material[g.idx(ii, jj)] == Material::Gst)
                        touches = true;
                }
            }
        if (!touches)
            throw std::invalid_argument(std::string("geometry: contact ") + port_name(p) +
                                        " has no GST neighbors");
    }
    return g;
}

std::vector<int> corridor_cells(const Grid& grid, int c1, int c2) {
    if (c1 == c2) throw std::invalid_argument("corridor_cells: contacts must be distinct");
    if (c1 < 0 || c1 >= kNumPorts || c2 < 0 || c2 >= kNumPorts)
        throw std::invalid_argument("corridor_cells: contact id out of range");
    double x0 = grid.contact_center[c1][0], y0 = grid.contact_center[c1][1];
    double x1 = grid.contact_center[c2][0], y1 = grid.contact_center[c2][1];
    // Sample the segment densely and collect unique cells (supercover).
    double len = std::hypot(x1 - x0, y1 - y0);
    int nsamp = std::max(2, static_cast<int>(std::ceil(len / (0.25 * grid.h))));
    std::vector<int> out;
    int last = -1;
    for (int s = 0; s <= nsamp; ++s) {
        double t = static_cast<double>(s) / nsamp;
        double x = x0 + t * (x1 - x0), y = y0 + t * (y1 - y0);
        int i = static_cast<int>(std::floor((x + grid.half_width) / grid.h));
        int j = static_cast<int>(std::floor((y + grid.half_width) / grid.h));
        if (!grid.inside(i, j)) continue;
        int c = grid.idx(i, j);
        if (c != last) {
            out.push_back(c);
            last = c;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace pcm
