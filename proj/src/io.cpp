// SPDX-License-Identifier: Apache-2.0

#include "pcm/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace pcm {

namespace {
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    return f;
}
}  // namespace

void ensure_directory(const std::string& path) {
    if (path.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

void write_vtk_snapshot(const std::string& path, const Grid& grid, const Snapshot& snap,
                        double T_melt) {
    std::ofstream f = open_out(path);
    f << "# vtk DataFile Version 3.0\n";
    f << "device snapshot t=" << fmt(snap.t * 1e9) << " ns\n";
    f << "ASCII\n";
    f << "DATASET STRUCTURED_POINTS\n";
    f << "DIMENSIONS " << grid.nx + 1 << " " << grid.ny + 1 << " 2\n";
    f << "ORIGIN " << fmt(-grid.half_width) << " " << fmt(-grid.half_width) << " 0\n";
    f << "SPACING " << fmt(grid.h) << " " << fmt(grid.h) << " " << fmt(grid.depth) << "\n";
    f << "CELL_DATA " << grid.cells() << "\n";

    auto scalar = [&](const char* name, auto&& value_of) {
        f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int c = 0; c < grid.cells(); ++c) f << fmt(value_of(c)) << "\n";
    };
    scalar("cd1", [&](int c) { return snap.cd.cd1[c]; });
    scalar("cd2", [&](int c) { return snap.cd.cd2[c]; });
    scalar("crystallinity", [&](int c) { return snap.cd.norm1(c); });
    scalar("molten", [&](int c) {
        return (grid.material[c] == Material::Gst && snap.T[c] > T_melt) ? 1.0 : 0.0;
    });
    scalar("temperature", [&](int c) { return snap.T[c]; });
    scalar("potential", [&](int c) { return snap.V[c]; });
    scalar("conductivity", [&](int c) { return snap.sigma[c]; });
}

void write_csv_raster(const std::string& path, const Grid& grid, const std::vector<int>& values) {
    std::ofstream f = open_out(path);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (i) f << ",";
            f << values[grid.idx(i, j)];
        }
        f << "\n";
    }
}

void write_csv_raster(const std::string& path, const Grid& grid,
                      const std::vector<double>& values) {
    std::ofstream f = open_out(path);
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            if (i) f << ",";
            f << fmt(values[grid.idx(i, j)]);
        }
        f << "\n";
    }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream f = open_out(path);
    f << "t_ns,I_W1W2_uA,I_W1W3_uA,Q_V,Qbar_V,Y_V,P_uW,E_pJ,event\n";
    for (const TraceRow& r : trace) {
        f << fmt(r.t * 1e9) << "," << fmt(r.i_w12 * 1e6) << "," << fmt(r.i_w13 * 1e6) << ","
          << fmt(r.q) << "," << fmt(r.qbar) << "," << fmt(r.y) << "," << fmt(r.power * 1e6) << ","
          << fmt(r.energy * 1e12) << "," << r.event << "\n";
    }
}

}  // namespace pcm
