// SPDX-License-Identifier: Apache-2.0
//
// Phase-, temperature- and field-dependent property set for the GST patch,
// the TiN contacts and the oxide surround. All evaluators are pure functions
// of their value arguments.

#ifndef PCM_MATERIALS_HPP
#define PCM_MATERIALS_HPP

#include <utility>
#include <vector>

#include "pcm/types.hpp"

namespace pcm {

// Property linear in temperature around 300 K.
struct LinearInT {
    double at300 = 0.0;
    double slope = 0.0;  // per K
    double operator()(double T) const { return at300 + slope * (T - 300.0); }
};

struct MaterialModel {
    // Electrical conductivity [S/m]. Both branches are Arrhenius in T,
    // normalized to their 300 K values; the amorphous branch adds
    // exponential field enhancement.
    double sigma_c0 = 2.0e3;        // crystalline value at 300 K
    double Ea_c = 0.05;             // eV; drives the crystalline-path runaway
    double sigma_a0 = 0.0;          // 0 -> derived from contrast_300K below
    double contrast_300K = 1.0e4;   // sigma_c0 / sigma_a(300 K, E=0)
    double Ea_a = 0.35;             // eV
    double sigma_melt = 1.0e5;
    double melt_sigma_ramp = 25.0;  // K; mushy blend from mixture to melt
    double E_field_scale = 5.0e7;   // V/m
    double sigma_tin = 1.0e6;

    // Seebeck coefficients [V/K], linear in T per branch, conductance-mixed.
    LinearInT S_c{30e-6, 0.0};
    LinearInT S_a{350e-6, -0.5e-6};

    // Thermal conductivities [W/(m K)], optionally linear in T.
    LinearInT k_c{0.5, 0.0};
    LinearInT k_a{0.25, 0.0};
    LinearInT k_ox{1.4, 0.0};
    LinearInT k_tin{12.0, 0.0};
    double k_melt = 2.0;  // W/(m K), molten GST (Wiedemann-Franz scale)

    // GST specific heat [J/(g K)] as (T, Cp) breakpoints, linearly
    // interpolated with flat extrapolation. A single entry means constant.
    std::vector<std::pair<double, double>> cp_gst{{300.0, 0.21}};

    // Latent heat of the amorphous<->crystalline/melt transition [J/g],
    // applied inside a tent window of half-width dH_window around T_melt.
    double dH_ac = 120.0;
    double dH_window = 40.0;  // K

    double density = 6.2;  // g/cm^3 (GST)

    // Volumetric heat capacities for the passive materials [J/(m^3 K)].
    double rho_cp_ox = 1.6e6;
    double rho_cp_tin = 3.2e6;

    double T_melt = 873.0;
    double T_glass = 420.0;
    double T_ambient = 293.0;

    // Face-conductance reduction across grain boundaries (0 disables).
    double gb_penalty = 0.15;

    // Effective electrical conductivity [S/m] for a GST cell with
    // crystalline fraction `phase_mix`; `molten` overrides the mixture.
    double sigma(double phase_mix, double T, double E, bool molten) const;
    double sigma_crystalline(double T) const;
    double sigma_amorphous(double T, double E) const;
    double sigma_a_prefactor() const;

    // Conductance-weighted Seebeck coefficient [V/K] at zero field.
    double seebeck(double phase_mix, double T) const;

    double thermal_k(Material m, double phase_mix, double T) const;
    double heat_capacity(double T) const;  // J/(g K), GST
    // Volumetric heat capacity [J/(m^3 K)] of a cell.
    double rho_cp(Material m, double T) const;

    // Volumetric latent-heat source [W/m^3]; positive when crystallinity
    // grows (exothermic), negative when it melts away.
    double latent_heat_rate(double d_crystallinity_dt, double T) const;
    double latent_window(double T) const;  // tent weight in [0,1]

    // Checks positivity/range constraints; throws std::invalid_argument.
    void validate() const;
};

}  // namespace pcm

#endif
