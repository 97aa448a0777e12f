// SPDX-License-Identifier: Apache-2.0

#ifndef PCM_TYPES_HPP
#define PCM_TYPES_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace pcm {

// Boltzmann constant in eV/K (activation energies are configured in eV).
inline constexpr double kBoltzmannEv = 8.617333262e-5;

enum class Material : std::uint8_t { Oxide = 0, Gst = 1, Tin = 2 };

// Port order is fixed: the write star first, then the read star.
enum Port : int { W1 = 0, W2 = 1, W3 = 2, R1 = 3, R2 = 4, R3 = 5 };
inline constexpr int kNumPorts = 6;

inline const char* port_name(int p) {
    static const char* names[kNumPorts] = {"W1", "W2", "W3", "R1", "R2", "R3"};
    if (p < 0 || p >= kNumPorts) throw std::invalid_argument("port index out of range");
    return names[p];
}

inline int port_from_name(const std::string& s) {
    for (int p = 0; p < kNumPorts; ++p)
        if (s == port_name(p)) return p;
    throw std::invalid_argument("unknown contact role '" + s + "'");
}

// Thrown by the iterative and nonlinear solvers on non-convergence; carries
// the last residual so callers can report it.
class SolveError : public std::runtime_error {
  public:
    SolveError(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

}  // namespace pcm

#endif
