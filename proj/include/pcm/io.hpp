// SPDX-License-Identifier: Apache-2.0
//
// Output writers: VTK legacy structured-points snapshots, CSV rasters and
// the trace time series. All writers are deterministic byte-for-byte for
// identical inputs.

#ifndef PCM_IO_HPP
#define PCM_IO_HPP

#include <string>
#include <vector>

#include "pcm/engine.hpp"
#include "pcm/geometry.hpp"

namespace pcm {

// Snapshot fields cd1, cd2, crystallinity, molten, temperature, potential,
// conductivity as CELL_DATA on a structured-points grid.
void write_vtk_snapshot(const std::string& path, const Grid& grid, const Snapshot& snap,
                        double T_melt);

// Integer raster (nx columns x ny rows) as CSV, row j=0 first.
void write_csv_raster(const std::string& path, const Grid& grid, const std::vector<int>& values);
void write_csv_raster(const std::string& path, const Grid& grid,
                      const std::vector<double>& values);

// Trace CSV with the fixed column set
// t_ns,I_W1W2_uA,I_W1W3_uA,Q_V,Qbar_V,Y_V,P_uW,E_pJ,event
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

void ensure_directory(const std::string& path);

}  // namespace pcm

#endif
