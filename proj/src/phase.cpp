// SPDX-License-Identifier: Apache-2.0

#include "pcm/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pcm/rng.hpp"

namespace pcm {

namespace {
// RNG streams: keep setup and per-step draws apart.
constexpr std::uint64_t kStreamGrains = 1;
constexpr std::uint64_t kStreamNucleation = 2;
}  // namespace

double PhaseRates::window(double T) const {
    if (T <= T_glass || T >= T_melt) return 0.0;
    double x = (T - T_glass) / (T_melt - T_glass);
    double s = std::sin(std::numbers::pi * std::pow(x, window_skew));
    return s * s;
}

double PhaseRates::amorph_rate_at(double T) const {
    if (T <= T_melt) return 0.0;
    if (melt_superheat_ramp <= 0.0) return amorphization_rate;
    return amorphization_rate * std::min(1.0, (T - T_melt) / melt_superheat_ramp);
}

void PhaseRates::validate() const {
    if (growth_max < 0.0 || nucleation_max < 0.0 || amorphization_rate < 0.0)
        throw std::invalid_argument("phase rates must be non-negative");
    if (amorphization_rate < 100.0 * growth_max)
        throw std::invalid_argument("amorphization_rate must be >= 100x max growth rate");
    if (eps_nuc <= 0.0 || eps_nuc > 1.0)
        throw std::invalid_argument("eps_nuc must be in (0,1]");
    if (!(T_glass < T_melt)) throw std::invalid_argument("T_glass must be below T_melt");
}

CDField init_grain_map(const Grid& grid, std::uint64_t seed, int n_grains) {
    if (n_grains < 2) n_grains = 2;
    SequentialRng rng(seed, kStreamGrains);

    // Voronoi sites uniform in the patch disk (rejection sampling).
    std::vector<std::array<double, 3>> sites;  // x, y, orientation
    sites.reserve(n_grains);
    while (static_cast<int>(sites.size()) < n_grains) {
        double x = (2.0 * rng.next01() - 1.0) * grid.gst_radius;
        double y = (2.0 * rng.next01() - 1.0) * grid.gst_radius;
        if (x * x + y * y > grid.gst_radius * grid.gst_radius) continue;
        double orient = rng.next01() < 0.5 ? 0.0 : 1.0;
        sites.push_back({x, y, orient});
    }
    // Both orientations must occur so grain boundaries exist.
    bool any0 = false, any1 = false;
    for (const auto& s : sites) (s[2] == 0.0 ? any0 : any1) = true;
    if (!any0) sites.back()[2] = 0.0;
    if (!any1) sites.back()[2] = 1.0;

    CDField f = CDField::zeros(grid);
    for (int c : grid.gst_cells) {
        int i = c % grid.nx, j = c / grid.nx;
        double x = grid.x_of(i), y = grid.y_of(j);
        int best = 0;
        double bd = 1e300;
        for (int s = 0; s < n_grains; ++s) {
            double dx = x - sites[s][0], dy = y - sites[s][1];
            double d2 = dx * dx + dy * dy;
            if (d2 < bd) {
                bd = d2;
                best = s;
            }
        }
        if (sites[best][2] == 0.0)
            f.cd1[c] = 1.0;
        else
            f.cd2[c] = 1.0;
    }
    return f;
}

void rate_step(CDField& cd, const Grid& grid, const std::vector<double>& T, double dt,
               const PhaseRates& rates, std::uint64_t seed, std::uint64_t step_index,
               std::vector<double>& dnorm_dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("rate_step: dt must be positive");
    if (static_cast<int>(T.size()) != grid.cells())
        throw std::invalid_argument("rate_step: temperature field size mismatch");
    if (dnorm_dt.size() != T.size()) dnorm_dt.assign(T.size(), 0.0);
    std::fill(dnorm_dt.begin(), dnorm_dt.end(), 0.0);

    const std::vector<double>& c1 = cd.cd1;  // frozen previous step
    const std::vector<double>& c2 = cd.cd2;
    std::vector<double> n1(c1), n2(c2);

    const int nx = grid.nx;
    for (int c : grid.gst_cells) {
        double Tc = T[c];
        if (!std::isfinite(Tc)) throw std::invalid_argument("rate_step: non-finite temperature");
        double old1 = c1[c], old2 = c2[c];
        double norm_old = old1 + old2;
        double v1 = old1, v2 = old2;

        if (Tc > rates.T_melt) {
            double decay = std::exp(-rates.amorph_rate_at(Tc) * dt);
            v1 = old1 * decay;
            v2 = old2 * decay;
        } else if (Tc > rates.T_glass) {
            // Template growth from the 4-neighborhood, orientation-preserving.
            int i = c % nx, j = c / nx;
            double nb1 = 0.0, nb2 = 0.0;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                int ii = i + di[k], jj = j + dj[k];
                if (!grid.inside(ii, jj)) continue;
                int cc = grid.idx(ii, jj);
                if (grid.material[cc] != Material::Gst) continue;
                nb1 += c1[cc];
                nb2 += c2[cc];
            }
            double gr = rates.growth_rate(Tc) * dt * (1.0 - norm_old);
            double d1 = gr * nb1 / 4.0;
            double d2 = gr * nb2 / 4.0;
            if (d1 + d2 > 1.0)
                throw std::invalid_argument("rate_step: dt too large for growth rate");
            v1 = old1 + d1;
            v2 = old2 + d2;

            // Poisson nucleation, counter-based per cell and step.
            double p = rates.nucleation_rate(Tc) * dt;
            if (p > 0.0) {
                std::uint64_t ctr =
                    (step_index << 20) ^ static_cast<std::uint64_t>(c);
                double u = uniform01(seed, kStreamNucleation, ctr);
                if (u < p) {
                    bool pick1 = uniform01(seed, kStreamNucleation, ctr ^ 0x5851f42d4c957f2dULL) < 0.5;
                    if (pick1)
                        v1 = std::max(v1, rates.eps_nuc);
                    else
                        v2 = std::max(v2, rates.eps_nuc);
                }
            }
        }
        // Clamp to the CD invariants: components non-negative, norm <= 1.
        v1 = std::max(0.0, v1);
        v2 = std::max(0.0, v2);
        double s = v1 + v2;
        if (s > 1.0) {
            v1 /= s;
            v2 /= s;
            s = 1.0;
        }
        n1[c] = v1;
        n2[c] = v2;
        dnorm_dt[c] = (s - norm_old) / dt;
    }
    cd.cd1.swap(n1);
    cd.cd2.swap(n2);
}

double crystallinity_along_path(const CDField& cd, const Grid& grid, int c1, int c2) {
    double m = 1.0;
    for (int c : corridor_cells(grid, c1, c2)) {
        if (grid.material[c] != Material::Gst) continue;
        m = std::min(m, cd.norm1(c));
    }
    return m;
}

}  // namespace pcm
