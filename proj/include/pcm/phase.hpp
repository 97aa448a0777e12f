// SPDX-License-Identifier: Apache-2.0
//
// Crystal-density vector field and its rate equation: nucleation, template
// growth and melt amorphization, integrated with a Jacobi-style update and
// counter-based per-cell RNG.

#ifndef PCM_PHASE_HPP
#define PCM_PHASE_HPP

#include <cstdint>
#include <vector>

#include "pcm/geometry.hpp"

namespace pcm {

// Per-cell two-component crystal density. Values are zero outside GST.
struct CDField {
    std::vector<double> cd1, cd2;

    double norm1(int c) const { return cd1[c] + cd2[c]; }
    static CDField zeros(const Grid& g) {
        CDField f;
        f.cd1.assign(g.cells(), 0.0);
        f.cd2.assign(g.cells(), 0.0);
        return f;
    }
};

struct PhaseRates {
    double growth_max = 7.5e9;        // 1/s, peak of the growth window
    double nucleation_max = 1.0e5;    // 1/s per cell, peak of the window
    double amorphization_rate = 8.0e11;  // 1/s above T_melt
    double melt_superheat_ramp = 25.0;   // K over which amorphization activates
    double eps_nuc = 0.1;
    double window_skew = 2.0;  // shifts the kinetics peak toward T_melt
    double T_glass = 420.0;
    double T_melt = 873.0;

    // Smooth bump on (T_glass, T_melt), zero outside; skewed toward high T
    // (crystallization kinetics are mobility-limited at deep undercooling).
    double window(double T) const;
    double growth_rate(double T) const { return growth_max * window(T); }
    double nucleation_rate(double T) const { return nucleation_max * window(T); }
    // Amorphization ramps in over melt_superheat_ramp kelvin of superheat so
    // the latent sink stays heat-supply limited.
    double amorph_rate_at(double T) const;

    void validate() const;  // throws std::invalid_argument
};

// Fully crystalline start: seeded Voronoi partition into contiguous grains,
// each grain fully one orientation component. Deterministic per seed.
CDField init_grain_map(const Grid& grid, std::uint64_t seed, int n_grains = 12);

// One explicit rate step. Reads the previous field (Jacobi update), writes
// the clamped new field in place and the signed per-cell d||CD||_1/dt into
// `dnorm_dt` (sized cells()). `step_index` keys the per-cell RNG stream.
// Throws on non-finite T, dt <= 0, or a step so large a single change would
// exceed 1.
void rate_step(CDField& cd, const Grid& grid, const std::vector<double>& T, double dt,
               const PhaseRates& rates, std::uint64_t seed, std::uint64_t step_index,
               std::vector<double>& dnorm_dt);

// Minimum crystallinity over the straight corridor between two contacts;
// 0 means an amorphous strip fully blocks the path.
double crystallinity_along_path(const CDField& cd, const Grid& grid, int c1, int c2);

}  // namespace pcm

#endif
