#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qslr {

/// Deterministic RNG used for noise synthesis and masks. mt19937_64 has a
/// standard-mandated sequence and the Gaussian transform is done by hand, so
/// a seed reproduces the same stream on every platform/stdlib.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0,1).
    double uniform() {
        return (engine_() >> 11) * (1.0 / 9007199254740992.0); // 53-bit mantissa
    }

    /// Standard normal via Box-Muller (cached pair member).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace qslr
