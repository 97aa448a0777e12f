// SPDX-License-Identifier: Apache-2.0

#include "pcm/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace pcm {

namespace {

using nlohmann::json;

// Strict section reader: every key must be consumed.
class Section {
  public:
    Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object()) throw ConfigError(name_ + ": expected an object");
    }
    ~Section() = default;

    bool has(const std::string& key) {
        seen_.push_back(key);
        return j_.contains(key);
    }
    template <typename T>
    void get(const std::string& key, T& out) {
        if (!has(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(name_ + "." + key + ": " + e.what());
        }
    }
    const json& raw(const std::string& key) {
        seen_.push_back(key);
        return j_.at(key);
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
                throw ConfigError(name_ + "." + it.key() + ": unknown key");
        }
    }

  private:
    const json& j_;
    std::string name_;
    std::vector<std::string> seen_;
};

void get_linear(Section& s, const std::string& key, LinearInT& out) {
    if (!s.has(key)) return;
    const json& v = s.raw(key);
    if (v.is_number()) {
        out.at300 = v.get<double>();
        out.slope = 0.0;
    } else if (v.is_array() && v.size() == 2) {
        out.at300 = v[0].get<double>();
        out.slope = v[1].get<double>();
    } else {
        throw ConfigError(key + ": expected a number or [value_at_300K, slope]");
    }
}

void parse_materials(const json& j, MaterialModel& m) {
    Section s(j, "materials");
    s.get("sigma_c0", m.sigma_c0);
    s.get("Ea_c", m.Ea_c);
    s.get("sigma_a0", m.sigma_a0);
    s.get("contrast", m.contrast_300K);
    s.get("Ea_a", m.Ea_a);
    s.get("sigma_melt", m.sigma_melt);
    s.get("melt_sigma_ramp", m.melt_sigma_ramp);
    s.get("E_field_scale", m.E_field_scale);
    s.get("sigma_tin", m.sigma_tin);
    get_linear(s, "S_c", m.S_c);
    get_linear(s, "S_a", m.S_a);
    get_linear(s, "k_c", m.k_c);
    get_linear(s, "k_a", m.k_a);
    get_linear(s, "k_ox", m.k_ox);
    get_linear(s, "k_tin", m.k_tin);
    s.get("k_melt", m.k_melt);
    if (s.has("cp_gst")) {
        const json& v = s.raw("cp_gst");
        if (v.is_number()) {
            m.cp_gst = {{300.0, v.get<double>()}};
        } else {
            m.cp_gst.clear();
            for (const auto& pt : v) {
                if (!pt.is_array() || pt.size() != 2)
                    throw ConfigError("materials.cp_gst: expected [[T, Cp], ...]");
                m.cp_gst.emplace_back(pt[0].get<double>(), pt[1].get<double>());
            }
        }
    }
    s.get("dH_ac", m.dH_ac);
    s.get("dH_window", m.dH_window);
    s.get("density", m.density);
    s.get("rho_cp_ox", m.rho_cp_ox);
    s.get("rho_cp_tin", m.rho_cp_tin);
    s.get("T_melt", m.T_melt);
    s.get("T_glass", m.T_glass);
    s.get("T_ambient", m.T_ambient);
    s.get("gb_penalty", m.gb_penalty);
    s.finish();
}

void parse_geometry(const json& j, Config& cfg) {
    Section s(j, "geometry");
    double gst_r = cfg.geometry.gst_radius * 1e9;
    double con_r = cfg.geometry.contact_radius * 1e9;
    double half_w = cfg.geometry.domain_half_width * 1e9;
    double depth = cfg.geometry.depth * 1e9;
    s.get("gst_radius_nm", gst_r);
    s.get("contact_radius_nm", con_r);
    double con_cr = cfg.geometry.contact_center_radius * 1e9;
    s.get("contact_center_radius_nm", con_cr);
    cfg.geometry.contact_center_radius = con_cr * 1e-9;
    s.get("domain_half_width_nm", half_w);
    s.get("depth_nm", depth);
    cfg.geometry.gst_radius = gst_r * 1e-9;
    cfg.geometry.contact_radius = con_r * 1e-9;
    cfg.geometry.domain_half_width = half_w * 1e-9;
    cfg.geometry.depth = depth * 1e-9;
    s.get("cell_size_nm", cfg.cell_size_nm);
    if (s.has("contacts")) {
        const json& arr = s.raw("contacts");
        if (!arr.is_array() || arr.size() != kNumPorts)
            throw ConfigError("geometry.contacts: expected 6 entries");
        for (int i = 0; i < kNumPorts; ++i) {
            Section c(arr[i], "geometry.contacts[" + std::to_string(i) + "]");
            std::string role;
            double angle = 0.0;
            c.get("role", role);
            c.get("angle_deg", angle);
            c.finish();
            cfg.geometry.contacts[i] = {port_from_name(role), angle};
        }
    }
    s.finish();
}

void parse_phase(const json& j, PhaseRates& p, ExperimentParams& e) {
    Section s(j, "phase");
    s.get("growth_max", p.growth_max);
    s.get("nucleation_max", p.nucleation_max);
    s.get("amorphization_rate", p.amorphization_rate);
    s.get("melt_superheat_ramp_K", p.melt_superheat_ramp);
    s.get("eps_nuc", p.eps_nuc);
    s.get("window_skew", p.window_skew);
    s.get("n_grains", e.n_grains);
    s.finish();
}

void parse_circuit(const json& j, Config& cfg) {
    Section s(j, "circuit");
    std::string variant;
    if (s.has("variant")) {
        s.get("variant", variant);
        if (variant == "flipflop")
            cfg.circuit.variant = CircuitVariant::FlipFlop;
        else if (variant == "mux")
            cfg.circuit.variant = CircuitVariant::Mux;
        else
            throw ConfigError("circuit.variant: expected 'flipflop' or 'mux'");
    }
    double vth = cfg.circuit.write_fet.vth, beta = cfg.circuit.write_fet.beta,
           lambda = cfg.circuit.write_fet.lambda;
    s.get("vth", vth);
    s.get("beta", beta);
    s.get("lambda", lambda);
    cfg.circuit.write_fet = {vth, beta, lambda};
    cfg.circuit.read_fet = {vth, beta, lambda};
    s.get("r_load", cfg.circuit.r_load);
    s.get("r_mux", cfg.circuit.r_mux);
    s.get("r_series_w2", cfg.circuit.r_series_w2);
    s.get("r_series_w3", cfg.circuit.r_series_w3);
    s.get("v_read_rail", cfg.circuit.v_read_rail);
    s.get("gmin", cfg.circuit.gmin);
    s.get("vdd", cfg.vdd);
    s.get("read_gate_voltage", cfg.read_gate_voltage);
    s.finish();
}

void parse_engine(const json& j, EngineParams& e) {
    Section s(j, "engine");
    double active_ns = e.dt_max_active * 1e9, idle_ns = e.dt_max_idle * 1e9,
           min_ps = e.dt_min * 1e12;
    s.get("dt_max_active_ns", active_ns);
    s.get("dt_max_idle_ns", idle_ns);
    s.get("dt_min_ps", min_ps);
    e.dt_max_active = active_ns * 1e-9;
    e.dt_max_idle = idle_ns * 1e-9;
    e.dt_min = min_ps * 1e-12;
    s.get("max_dT_K", e.max_dT);
    s.get("max_dCD", e.max_dCD);
    s.get("sigma_reextract_tol", e.sigma_reextract_tol);
    s.get("fp_max_iters", e.fp_max_iters);
    s.get("fp_tol", e.fp_tol);
    s.get("cg_tol_electrical", e.cg_tol_electrical);
    s.get("cg_tol_thermal", e.cg_tol_thermal);
    s.get("newton_tol_A", e.newton_tol);
    s.get("newton_max_iters", e.newton_max_iters);
    s.get("dt_growth", e.dt_growth);
    s.finish();
}

void parse_experiment(const json& j, ExperimentParams& e) {
    Section s(j, "experiment");
    s.get("seed", e.seed);
    s.get("thermalize_ns", e.thermalize_ns);
    s.get("read_delay_ns", e.read_delay_ns);
    s.get("read_spacing_ns", e.read_spacing_ns);
    s.get("n_reads", e.n_reads);
    s.get("write_width_ns", e.write_width_ns);
    s.get("read_width_ns", e.read_width_ns);
    s.get("rise_ns", e.rise_ns);
    s.get("fall_ns", e.fall_ns);
    s.get("depths_nm", e.depths_nm);
    s.get("vdd_by_depth", e.vdd_by_depth);
    s.get("rl_list_ohm", e.rl_list_ohm);
    s.get("radii_nm", e.radii_nm);
    s.get("anneal_T_K", e.anneal_T_K);
    s.get("anneal_ns", e.anneal_ns);
    s.get("overlong_write_ns", e.overlong_write_ns);
    s.finish();
}

void parse_band(const json& j, const std::string& name, Band& b) {
    Section s(j, name);
    s.get("lo", b.lo);
    s.get("hi", b.hi);
    s.get("reference", b.reference);
    s.finish();
}

void parse_bands(const json& j, AcceptanceBands& b) {
    Section s(j, "acceptance_bands");
    s.get("early_contrast_min", b.early_contrast_min);
    s.get("stabilized_contrast_min", b.stabilized_contrast_min);
    s.get("stabilize_within_ns", b.stabilize_within_ns);
    s.get("read_disturb_max", b.read_disturb_max);
    s.get("thermalize_within_ns", b.thermalize_within_ns);
    if (s.has("i10_over_i20")) parse_band(s.raw("i10_over_i20"), "i10_over_i20", b.i10_over_i20);
    if (s.has("i5_over_i20")) parse_band(s.raw("i5_over_i20"), "i5_over_i20", b.i5_over_i20);
    if (s.has("p5_over_p20")) parse_band(s.raw("p5_over_p20"), "p5_over_p20", b.p5_over_p20);
    if (s.has("min_amorph_ns")) parse_band(s.raw("min_amorph_ns"), "min_amorph_ns", b.min_amorph_ns);
    s.finish();
}

json linear_to_json(const LinearInT& l) {
    if (l.slope == 0.0) return l.at300;
    return json::array({l.at300, l.slope});
}

json band_to_json(const Band& b) {
    return json{{"lo", b.lo}, {"hi", b.hi}, {"reference", b.reference}};
}

// Unit-converted values (m -> nm, s -> ns/ps) are quantized to 12 significant
// digits so the JSON echo round-trips to an identical document.
double q12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

}  // namespace

void Config::sync_derived() {
    phase.T_glass = materials.T_glass;
    phase.T_melt = materials.T_melt;
}

Config default_config() {
    Config cfg;
    cfg.sync_derived();
    return cfg;
}

void apply_json_overrides(Config& cfg, const json& j) {
    Section top(j, "config");
    if (top.has("materials")) parse_materials(top.raw("materials"), cfg.materials);
    if (top.has("geometry")) parse_geometry(top.raw("geometry"), cfg);
    if (top.has("phase")) parse_phase(top.raw("phase"), cfg.phase, cfg.experiment);
    if (top.has("circuit")) parse_circuit(top.raw("circuit"), cfg);
    if (top.has("engine")) parse_engine(top.raw("engine"), cfg.engine);
    if (top.has("experiment")) parse_experiment(top.raw("experiment"), cfg.experiment);
    if (top.has("acceptance_bands")) parse_bands(top.raw("acceptance_bands"), cfg.bands);
    top.finish();
    cfg.sync_derived();
    cfg.materials.validate();
    cfg.phase.validate();
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    Config cfg = default_config();
    apply_json_overrides(cfg, j);
    return cfg;
}

void apply_preset(Config& cfg, const std::string& preset) {
    double depth_nm;
    std::string key;
    if (preset == "depth20") {
        depth_nm = 20.0;
        key = "20";
    } else if (preset == "depth10") {
        depth_nm = 10.0;
        key = "10";
    } else if (preset == "depth5") {
        depth_nm = 5.0;
        key = "5";
    } else {
        throw ConfigError("unknown preset '" + preset + "' (depth20, depth10, depth5)");
    }
    cfg.geometry.depth = depth_nm * 1e-9;
    auto it = cfg.experiment.vdd_by_depth.find(key);
    if (it == cfg.experiment.vdd_by_depth.end())
        throw ConfigError("experiment.vdd_by_depth has no entry for depth " + key);
    cfg.vdd = it->second;
}

json config_to_json(const Config& cfg) {
    const MaterialModel& m = cfg.materials;
    json contacts = json::array();
    for (const auto& c : cfg.geometry.contacts)
        contacts.push_back({{"role", port_name(c.port)}, {"angle_deg", c.angle_deg}});
    json cp = json::array();
    for (const auto& [T, v] : m.cp_gst) cp.push_back(json::array({T, v}));

    return json{
        {"materials",
         {{"sigma_c0", m.sigma_c0},
          {"Ea_c", m.Ea_c},
          {"sigma_a0", m.sigma_a0},
          {"contrast", m.contrast_300K},
          {"Ea_a", m.Ea_a},
          {"sigma_melt", m.sigma_melt},
          {"melt_sigma_ramp", m.melt_sigma_ramp},
          {"E_field_scale", m.E_field_scale},
          {"sigma_tin", m.sigma_tin},
          {"S_c", linear_to_json(m.S_c)},
          {"S_a", linear_to_json(m.S_a)},
          {"k_c", linear_to_json(m.k_c)},
          {"k_a", linear_to_json(m.k_a)},
          {"k_ox", linear_to_json(m.k_ox)},
          {"k_tin", linear_to_json(m.k_tin)},
          {"k_melt", m.k_melt},
          {"cp_gst", cp},
          {"dH_ac", m.dH_ac},
          {"dH_window", m.dH_window},
          {"density", m.density},
          {"rho_cp_ox", m.rho_cp_ox},
          {"rho_cp_tin", m.rho_cp_tin},
          {"T_melt", m.T_melt},
          {"T_glass", m.T_glass},
          {"T_ambient", m.T_ambient},
          {"gb_penalty", m.gb_penalty}}},
        {"geometry",
         {{"gst_radius_nm", q12(cfg.geometry.gst_radius * 1e9)},
          {"contact_radius_nm", q12(cfg.geometry.contact_radius * 1e9)},
          {"contact_center_radius_nm", q12(cfg.geometry.contact_center_radius * 1e9)},
          {"domain_half_width_nm", q12(cfg.geometry.domain_half_width * 1e9)},
          {"depth_nm", q12(cfg.geometry.depth * 1e9)},
          {"cell_size_nm", cfg.cell_size_nm},
          {"contacts", contacts}}},
        {"phase",
         {{"growth_max", cfg.phase.growth_max},
          {"nucleation_max", cfg.phase.nucleation_max},
          {"amorphization_rate", cfg.phase.amorphization_rate},
          {"melt_superheat_ramp_K", cfg.phase.melt_superheat_ramp},
          {"eps_nuc", cfg.phase.eps_nuc},
          {"window_skew", cfg.phase.window_skew},
          {"n_grains", cfg.experiment.n_grains}}},
        {"circuit",
         {{"variant", cfg.circuit.variant == CircuitVariant::FlipFlop ? "flipflop" : "mux"},
          {"vth", cfg.circuit.write_fet.vth},
          {"beta", cfg.circuit.write_fet.beta},
          {"lambda", cfg.circuit.write_fet.lambda},
          {"r_load", cfg.circuit.r_load},
          {"r_mux", cfg.circuit.r_mux},
          {"r_series_w2", cfg.circuit.r_series_w2},
          {"r_series_w3", cfg.circuit.r_series_w3},
          {"v_read_rail", cfg.circuit.v_read_rail},
          {"gmin", cfg.circuit.gmin},
          {"vdd", cfg.vdd},
          {"read_gate_voltage", cfg.read_gate_voltage}}},
        {"engine",
         {{"dt_max_active_ns", q12(cfg.engine.dt_max_active * 1e9)},
          {"dt_max_idle_ns", q12(cfg.engine.dt_max_idle * 1e9)},
          {"dt_min_ps", q12(cfg.engine.dt_min * 1e12)},
          {"max_dT_K", cfg.engine.max_dT},
          {"max_dCD", cfg.engine.max_dCD},
          {"sigma_reextract_tol", cfg.engine.sigma_reextract_tol},
          {"fp_max_iters", cfg.engine.fp_max_iters},
          {"fp_tol", cfg.engine.fp_tol},
          {"cg_tol_electrical", cfg.engine.cg_tol_electrical},
          {"cg_tol_thermal", cfg.engine.cg_tol_thermal},
          {"newton_tol_A", cfg.engine.newton_tol},
          {"newton_max_iters", cfg.engine.newton_max_iters},
          {"dt_growth", cfg.engine.dt_growth}}},
        {"experiment",
         {{"seed", cfg.experiment.seed},
          {"thermalize_ns", cfg.experiment.thermalize_ns},
          {"read_delay_ns", cfg.experiment.read_delay_ns},
          {"read_spacing_ns", cfg.experiment.read_spacing_ns},
          {"n_reads", cfg.experiment.n_reads},
          {"write_width_ns", cfg.experiment.write_width_ns},
          {"read_width_ns", cfg.experiment.read_width_ns},
          {"rise_ns", cfg.experiment.rise_ns},
          {"fall_ns", cfg.experiment.fall_ns},
          {"depths_nm", cfg.experiment.depths_nm},
          {"vdd_by_depth", cfg.experiment.vdd_by_depth},
          {"rl_list_ohm", cfg.experiment.rl_list_ohm},
          {"radii_nm", cfg.experiment.radii_nm},
          {"anneal_T_K", cfg.experiment.anneal_T_K},
          {"anneal_ns", cfg.experiment.anneal_ns},
          {"overlong_write_ns", cfg.experiment.overlong_write_ns}}},
        {"acceptance_bands",
         {{"early_contrast_min", cfg.bands.early_contrast_min},
          {"stabilized_contrast_min", cfg.bands.stabilized_contrast_min},
          {"stabilize_within_ns", cfg.bands.stabilize_within_ns},
          {"read_disturb_max", cfg.bands.read_disturb_max},
          {"thermalize_within_ns", cfg.bands.thermalize_within_ns},
          {"i10_over_i20", band_to_json(cfg.bands.i10_over_i20)},
          {"i5_over_i20", band_to_json(cfg.bands.i5_over_i20)},
          {"p5_over_p20", band_to_json(cfg.bands.p5_over_p20)},
          {"min_amorph_ns", band_to_json(cfg.bands.min_amorph_ns)}}}};
}

}  // namespace pcm
