// SPDX-License-Identifier: Apache-2.0
//
// Solver verification against independent analytic oracles: uniform-strip
// resistance, 1D transient heat (erfc similarity solution), Kirchhoff sums
// on random conductivity fields, linearity/superposition, and the per-step
// energy audit across a full write cycle.

#ifndef PCM_VERIFY_HPP
#define PCM_VERIFY_HPP

#include <string>
#include <vector>

#include "pcm/config.hpp"

namespace pcm {

struct VerifyResult {
    std::string name;
    bool pass = false;
    double value = 0.0;  // measured error / residual
    double limit = 0.0;
    std::string detail;
};

std::vector<VerifyResult> verify_strip_resistance();
std::vector<VerifyResult> verify_heat_erfc();
std::vector<VerifyResult> verify_kirchhoff(const Config& cfg, int n_fields = 100);
std::vector<VerifyResult> verify_superposition(const Config& cfg);
std::vector<VerifyResult> verify_energy_audit(const Config& cfg);

// The full `verify` suite in a fixed order.
std::vector<VerifyResult> run_verification(const Config& cfg);

}  // namespace pcm

#endif
