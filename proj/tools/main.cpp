// SPDX-License-Identifier: Apache-2.0
//
// pcmsim: electrothermal simulator for a six-contact phase-change device
// with its five-transistor access circuit. Subcommands: run, sweep,
// materials dump, geometry dump, verify.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pcm/config.hpp"
#include "pcm/harness.hpp"
#include "pcm/io.hpp"
#include "pcm/verify.hpp"

namespace {

int g_verbosity = 1;  // 0 quiet, 1 normal, 2 verbose

std::string default_out_dir(const std::string& experiment) {
    if (const char* env = std::getenv("PCMSIM_OUT")) return std::string(env) + "/" + experiment;
    return "out/" + experiment;
}

pcm::Config build_config(const std::string& config_path, const std::string& preset,
                         long long seed) {
    pcm::Config cfg = config_path.empty() ? pcm::default_config() : pcm::load_config(config_path);
    if (!preset.empty()) pcm::apply_preset(cfg, preset);
    if (seed >= 0) cfg.experiment.seed = static_cast<std::uint64_t>(seed);
    return cfg;
}

int finish_report(const pcm::ExperimentReport& rep, const std::string& out_dir) {
    pcm::write_report(rep, out_dir);
    if (g_verbosity >= 1) {
        std::printf("experiment %-16s %s\n", rep.experiment.c_str(),
                    rep.pass ? "PASS" : "FAIL");
        for (const auto& f : rep.failures) std::printf("  band violation: %s\n", f.c_str());
        if (g_verbosity >= 2) {
            std::printf("%s\n", rep.scalars.dump(2).c_str());
            for (const auto& a : rep.artifacts)
                std::printf("  artifact: %s/%s\n", out_dir.c_str(), a.c_str());
        }
        if (!out_dir.empty()) std::printf("  report: %s/report.json\n", out_dir.c_str());
    }
    return rep.pass ? 0 : 1;
}

void dump_materials(const pcm::Config& cfg, const std::string& out_dir) {
    pcm::ensure_directory(out_dir);
    std::ofstream f(out_dir + "/materials.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out_dir + "/materials.csv");
    const pcm::MaterialModel& m = cfg.materials;
    f << "T_K,sigma_c_S_per_m,sigma_a_S_per_m,sigma_mix50_S_per_m,S_c_V_per_K,S_a_V_per_K,"
         "k_c,k_a,k_ox,k_tin,cp_J_per_gK,latent_window\n";
    for (int T = 293; T <= 1200; ++T) {
        double Td = T;
        f << T << "," << m.sigma(1.0, Td, 0.0, false) << "," << m.sigma(0.0, Td, 0.0, false)
          << "," << m.sigma(0.5, Td, 0.0, false) << "," << m.S_c(Td) << "," << m.S_a(Td) << ","
          << m.thermal_k(pcm::Material::Gst, 1.0, Td) << ","
          << m.thermal_k(pcm::Material::Gst, 0.0, Td) << ","
          << m.thermal_k(pcm::Material::Oxide, 0.0, Td) << ","
          << m.thermal_k(pcm::Material::Tin, 0.0, Td) << "," << m.heat_capacity(Td) << ","
          << m.latent_window(Td) << "\n";
    }
    if (g_verbosity >= 1) std::printf("wrote %s/materials.csv\n", out_dir.c_str());
}

void dump_geometry(const pcm::Config& cfg, const std::string& out_dir) {
    pcm::ensure_directory(out_dir);
    pcm::Grid grid = cfg.make_grid();
    std::vector<int> mat(grid.cells()), contact(grid.cells());
    for (int c = 0; c < grid.cells(); ++c) {
        mat[c] = static_cast<int>(grid.material[c]);
        contact[c] = grid.contact[c];
    }
    pcm::write_csv_raster(out_dir + "/material_mask.csv", grid, mat);
    pcm::write_csv_raster(out_dir + "/contact_mask.csv", grid, contact);
    if (g_verbosity >= 1)
        std::printf("wrote %s/material_mask.csv and contact_mask.csv (%dx%d cells)\n",
                    out_dir.c_str(), grid.nx, grid.ny);
}

int run_verify(const pcm::Config& cfg) {
    auto results = pcm::run_verification(cfg);
    bool all = true;
    for (const auto& r : results) {
        all = all && r.pass;
        std::printf("[%s] %-28s %.3e (limit %.1e)%s%s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.value, r.limit, r.detail.empty() ? "" : "  ",
                    r.detail.c_str());
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pcmsim: six-contact phase-change device / access-circuit simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false, verbose = false;
    app.add_flag("--quiet,-q", quiet, "only errors");
    app.add_flag("--verbose,-v", verbose, "extra detail");

    std::string config_path, preset, out_dir;
    long long seed = -1;
    int n_pulses = 4;
    std::string experiment, sweep_kind;

    CLI::App* run = app.add_subcommand("run", "run one experiment");
    run->add_option("experiment", experiment,
                    "initialize | toggle-flipflop | toggle-mux | rl-sweep | scaling | "
                    "min-amorph-time | failure-anneal")
        ->required();
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--preset", preset, "depth20 | depth10 | depth5");
    run->add_option("--seed", seed, "RNG seed override");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--pulses", n_pulses, "toggle pulses for toggle-flipflop");

    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweeps");
    sweep->add_option("kind", sweep_kind, "depth (thickness scaling) | rl (load resistors)")
        ->required();
    sweep->add_option("--config", config_path, "JSON config file");
    sweep->add_option("--seed", seed, "RNG seed override");
    sweep->add_option("--out", out_dir, "output directory");

    CLI::App* materials = app.add_subcommand("materials", "material model tools");
    CLI::App* mdump = materials->add_subcommand("dump", "emit property tables as CSV");
    mdump->add_option("--config", config_path, "JSON config file");
    mdump->add_option("--out", out_dir, "output directory");

    CLI::App* geometry = app.add_subcommand("geometry", "geometry tools");
    CLI::App* gdump = geometry->add_subcommand("dump", "emit material/contact masks as CSV");
    gdump->add_option("--config", config_path, "JSON config file");
    gdump->add_option("--preset", preset, "depth20 | depth10 | depth5");
    gdump->add_option("--out", out_dir, "output directory");

    CLI::App* verify = app.add_subcommand("verify", "run the analytic solver verification suite");
    verify->add_option("--config", config_path, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    g_verbosity = quiet ? 0 : (verbose ? 2 : 1);

    try {
        pcm::Config cfg = build_config(config_path, preset, seed);
        if (run->parsed()) {
            if (out_dir.empty()) out_dir = default_out_dir(experiment);
            pcm::ExperimentReport rep = pcm::run_experiment(experiment, cfg, out_dir, n_pulses);
            return finish_report(rep, out_dir);
        }
        if (sweep->parsed()) {
            std::string name;
            if (sweep_kind == "depth")
                name = "scaling";
            else if (sweep_kind == "rl")
                name = "rl-sweep";
            else
                throw pcm::ConfigError("unknown sweep kind '" + sweep_kind + "' (depth, rl)");
            if (out_dir.empty()) out_dir = default_out_dir(name);
            pcm::ExperimentReport rep = pcm::run_experiment(name, cfg, out_dir);
            return finish_report(rep, out_dir);
        }
        if (mdump->parsed()) {
            dump_materials(cfg, out_dir.empty() ? default_out_dir("materials") : out_dir);
            return 0;
        }
        if (gdump->parsed()) {
            dump_geometry(cfg, out_dir.empty() ? default_out_dir("geometry") : out_dir);
            return 0;
        }
        if (verify->parsed()) return run_verify(cfg);
    } catch (const pcm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
