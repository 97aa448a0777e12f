// SPDX-License-Identifier: Apache-2.0
//
// Structured configuration: one JSON file with sections for materials,
// geometry, phase, circuit, engine and experiment, plus the acceptance
// bands as data. Unknown keys are rejected with their full path.

#ifndef PCM_CONFIG_HPP
#define PCM_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcm/circuit.hpp"
#include "pcm/engine.hpp"
#include "pcm/geometry.hpp"
#include "pcm/materials.hpp"
#include "pcm/phase.hpp"

namespace pcm {

struct ExperimentParams {
    std::uint64_t seed = 7;
    int n_grains = 12;
    double thermalize_ns = 60.0;
    double read_delay_ns = 5.0;   // first read after write termination
    double read_spacing_ns = 10.0;
    int n_reads = 5;
    double write_width_ns = 5.0;
    double read_width_ns = 5.0;
    double rise_ns = 1.0;
    double fall_ns = 1.0;
    std::vector<double> depths_nm{20.0, 10.0, 5.0};
    std::map<std::string, double> vdd_by_depth{{"20", 3.0}, {"10", 2.2}, {"5", 1.65}};
    std::vector<double> rl_list_ohm{1e3, 3e3, 1e4, 3e4, 1e5};
    std::vector<double> radii_nm{25.0, 35.0};
    double anneal_T_K = 550.0;
    double anneal_ns = 80.0;
    double overlong_write_ns = 20.0;
};

// Pass/fail bands with the reported reference values they were derived from.
struct Band {
    double lo = 0.0, hi = 0.0;
    std::string reference;
};

struct AcceptanceBands {
    double early_contrast_min = 5.0;
    double stabilized_contrast_min = 30.0;
    double stabilize_within_ns = 100.0;
    double read_disturb_max = 0.01;
    Band i10_over_i20{0.35, 0.70, "peak write current 101/193 uA"};
    Band i5_over_i20{0.15, 0.45, "peak write current 56/193 uA"};
    Band p5_over_p20{0.08, 0.35, "max power 92/585 uW"};
    Band min_amorph_ns{2.0, 12.0, "minimum amorphization pulse 5-6 ns"};
    double thermalize_within_ns = 100.0;
};

struct Config {
    MaterialModel materials;
    DeviceGeometry geometry;
    double cell_size_nm = 2.0;
    PhaseRates phase;
    CircuitParams circuit;
    double vdd = 3.0;
    double read_gate_voltage = 0.0;  // 0 -> follow vdd
    EngineParams engine;
    ExperimentParams experiment;
    AcceptanceBands bands;

    double read_gate() const { return read_gate_voltage > 0.0 ? read_gate_voltage : vdd; }
    Grid make_grid() const { return build_grid(geometry, cell_size_nm * 1e-9); }
    // Keeps the cross-section copies (T_melt/T_glass) coherent.
    void sync_derived();
};

// Configuration problems carry a "section.key: message" description and map
// to CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

Config default_config();
Config load_config(const std::string& path);                  // defaults + file
void apply_json_overrides(Config& cfg, const nlohmann::json& j);
void apply_preset(Config& cfg, const std::string& preset);    // depth20/depth10/depth5
nlohmann::json config_to_json(const Config& cfg);

}  // namespace pcm

#endif
