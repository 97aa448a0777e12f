// SPDX-License-Identifier: Apache-2.0

#include "pcm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcm {

namespace {
void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " is not finite");
}
}  // namespace

double MaterialModel::sigma_a_prefactor() const {
    if (sigma_a0 > 0.0) return sigma_a0;
    // Pin the 300 K contrast: sigma_a(300, 0) = sigma_c0 / contrast_300K.
    return (sigma_c0 / contrast_300K) * std::exp(Ea_a / (kBoltzmannEv * 300.0));
}

double MaterialModel::sigma_amorphous(double T, double E) const {
    require_finite(T, "temperature");
    require_finite(E, "field magnitude");
    if (T < 0.0) throw std::invalid_argument("temperature below 0 K");
    double arr = std::exp(-Ea_a / (kBoltzmannEv * std::max(T, 1.0)));
    return sigma_a_prefactor() * arr * std::exp(std::fabs(E) / E_field_scale);
}

double MaterialModel::sigma_crystalline(double T) const {
    require_finite(T, "temperature");
    if (T < 0.0) throw std::invalid_argument("temperature below 0 K");
    // Normalized Arrhenius: exactly sigma_c0 at 300 K.
    return sigma_c0 * std::exp(Ea_c / kBoltzmannEv * (1.0 / 300.0 - 1.0 / std::max(T, 1.0)));
}

double MaterialModel::sigma(double phase_mix, double T, double E, bool molten) const {
    require_finite(phase_mix, "phase mix");
    if (phase_mix < 0.0 || phase_mix > 1.0)
        throw std::invalid_argument("phase mix outside [0,1]");
    double mixture =
        phase_mix * sigma_crystalline(T) + (1.0 - phase_mix) * sigma_amorphous(T, E);
    if (!molten) return mixture;
    // Mushy blend across the superheat ramp keeps the melt front resolvable.
    double w = melt_sigma_ramp > 0.0 ? std::min(1.0, (T - T_melt) / melt_sigma_ramp) : 1.0;
    if (w < 0.0) w = 0.0;
    return (1.0 - w) * mixture + w * sigma_melt;
}

double MaterialModel::seebeck(double phase_mix, double T) const {
    require_finite(phase_mix, "phase mix");
    require_finite(T, "temperature");
    if (phase_mix < 0.0 || phase_mix > 1.0)
        throw std::invalid_argument("phase mix outside [0,1]");
    if (phase_mix == 1.0) return S_c(T);
    if (phase_mix == 0.0) return S_a(T);
    double gc = phase_mix * sigma_crystalline(T);
    double ga = (1.0 - phase_mix) * sigma_amorphous(T, 0.0);
    double g = gc + ga;
    if (g <= 0.0) return 0.0;
    return (gc * S_c(T) + ga * S_a(T)) / g;
}

double MaterialModel::thermal_k(Material m, double phase_mix, double T) const {
    switch (m) {
        case Material::Oxide:
            return k_ox(T);
        case Material::Tin:
            return k_tin(T);
        case Material::Gst: {
            double k = phase_mix * k_c(T) + (1.0 - phase_mix) * k_a(T);
            if (T > T_melt && melt_sigma_ramp > 0.0) {
                double w = std::min(1.0, (T - T_melt) / melt_sigma_ramp);
                k = (1.0 - w) * k + w * k_melt;
            } else if (T > T_melt) {
                k = k_melt;
            }
            return k;
        }
    }
    throw std::invalid_argument("unknown material id");
}

double MaterialModel::heat_capacity(double T) const {
    require_finite(T, "temperature");
    const auto& pts = cp_gst;
    if (pts.empty()) throw std::invalid_argument("empty Cp table");
    if (T <= pts.front().first) return pts.front().second;
    if (T >= pts.back().first) return pts.back().second;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (T <= pts[i].first) {
            double f = (T - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
            return pts[i - 1].second + f * (pts[i].second - pts[i - 1].second);
        }
    }
    return pts.back().second;
}

double MaterialModel::rho_cp(Material m, double T) const {
    switch (m) {
        case Material::Oxide:
            return rho_cp_ox;
        case Material::Tin:
            return rho_cp_tin;
        case Material::Gst:
            // Cp [J/(g K)] * density [g/cm^3] -> 1e6 J/(m^3 K)
            return heat_capacity(T) * density * 1.0e6;
    }
    throw std::invalid_argument("unknown material id");
}

double MaterialModel::latent_window(double T) const {
    if (dH_window <= 0.0) return T == T_melt ? 1.0 : 0.0;
    return std::clamp(1.0 - std::fabs(T - T_melt) / dH_window, 0.0, 1.0);
}

double MaterialModel::latent_heat_rate(double d_crystallinity_dt, double T) const {
    require_finite(d_crystallinity_dt, "crystallinity rate");
    require_finite(T, "temperature");
    // dH [J/g] * density [g/cm^3] * 1e6 = J/m^3 per unit crystallinity.
    return d_crystallinity_dt * dH_ac * latent_window(T) * density * 1.0e6;
}

void MaterialModel::validate() const {
    auto pos = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(what) + " must be positive");
    };
    pos(sigma_c0, "sigma_c0");
    if (Ea_c < 0.0) throw std::invalid_argument("Ea_c must be non-negative");
    pos(contrast_300K, "contrast_300K");
    pos(sigma_melt, "sigma_melt");
    pos(E_field_scale, "E_field_scale");
    pos(sigma_tin, "sigma_tin");
    pos(Ea_a, "Ea_a");
    pos(density, "density");
    pos(rho_cp_ox, "rho_cp_ox");
    pos(rho_cp_tin, "rho_cp_tin");
    if (gb_penalty < 0.0 || gb_penalty >= 1.0)
        throw std::invalid_argument("gb_penalty must be in [0,1)");
    if (!(T_glass < T_melt)) throw std::invalid_argument("T_glass must be below T_melt");
    for (double T : {293.0, 600.0, 1200.0, 2000.0}) {
        pos(thermal_k(Material::Gst, 1.0, T), "k_c");
        pos(thermal_k(Material::Gst, 0.0, T), "k_a");
        pos(thermal_k(Material::Oxide, 0.0, T), "k_ox");
        pos(thermal_k(Material::Tin, 0.0, T), "k_tin");
        pos(heat_capacity(T), "Cp");
        pos(sigma(0.0, T, 0.0, false), "sigma_a");
    }
}

}  // namespace pcm
