// SPDX-License-Identifier: Apache-2.0
//
// Experiment definitions on top of the engine: initialization, toggle
// flip-flop, toggle mux, R_L sweep, thickness scaling, minimum
// amorphization time, failure + anneal recovery. Each returns a structured
// report with pass/fail bands; failures are reported, not thrown.

#ifndef PCM_HARNESS_HPP
#define PCM_HARNESS_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "pcm/config.hpp"
#include "pcm/engine.hpp"

namespace pcm {

struct ExperimentReport {
    std::string experiment;
    bool pass = true;
    std::vector<std::string> failures;
    nlohmann::json scalars = nlohmann::json::object();
    nlohmann::json rows = nlohmann::json::array();
    nlohmann::json config_echo;
    std::vector<std::string> artifacts;

    void fail(const std::string& why) {
        pass = false;
        failures.push_back(why);
    }
    void check(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
};

// Schedule assembly following the common pulse protocol.
class ScheduleBuilder {
  public:
    explicit ScheduleBuilder(const Config& cfg);

    int add_write(double width_ns = 0.0, double amplitude = 0.0);  // 0 -> defaults
    void add_reads_after_write(int write_index);  // n_reads plain read pulses
    void add_mux_read_burst(int write_index);     // four (x1,x2) combinations
    int add_read_now(bool x1_high, bool x2_high, int write_index = -1);
    void add_anneal(double T_K, double duration_ns);
    void add_snapshot(double t_ns);
    void space_after_write(int write_index);      // advance to end + thermalize
    double cursor_ns() const { return t_ / 1e-9; }
    void set_cursor_ns(double t_ns) { t_ = t_ns * 1e-9; }
    Schedule finish(double tail_ns = 5.0);

  private:
    const Config& cfg_;
    Schedule s_;
    double t_;
    int add_read(bool x1_high, bool x2_high, int write_index, double t0);
};

struct ReadMeasurement {
    int read_index = -1;
    int after_write = -1;
    double t_mid = 0.0;
    double q = 0.0, qbar = 0.0, y = 0.0;
    double contrast = 0.0;          // max/min of (q, qbar)
    double c12_delta = 0.0, c13_delta = 0.0;  // corridor change across the read
    bool x1_high = false, x2_high = false;
};

std::vector<ReadMeasurement> measure_reads(const RunResult& run, const Schedule& schedule);

// Trace integral of source power over [t0, t1].
double energy_in_window(const std::vector<TraceRow>& trace, double t0, double t1);
double peak_in_window(const std::vector<TraceRow>& trace, double t0, double t1,
                      double (*value)(const TraceRow&));

ExperimentReport exp_initialize(const Config& cfg, const std::string& out_dir);
ExperimentReport exp_toggle_flipflop(const Config& cfg, int n_pulses, const std::string& out_dir);
ExperimentReport exp_toggle_mux(const Config& cfg, const std::string& out_dir);
ExperimentReport exp_rl_sweep(const Config& cfg, const std::string& out_dir);
ExperimentReport exp_scaling(const Config& cfg, const std::string& out_dir);
ExperimentReport exp_min_amorph_time(const Config& cfg, const std::string& out_dir);
ExperimentReport exp_failure_anneal(const Config& cfg, const std::string& out_dir);

// Dispatch by CLI name ("initialize", "toggle-flipflop", ...). Throws
// ConfigError on unknown names.
ExperimentReport run_experiment(const std::string& name, const Config& cfg,
                                const std::string& out_dir, int n_pulses = 4);

void write_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace pcm

#endif
