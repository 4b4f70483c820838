#pragma once
// Seeded RNG with hand-rolled draw helpers so that logs are reproducible
// across standard libraries (std distributions are implementation-defined).

#include <cstdint>
#include <random>

namespace gridconf {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n).
    int uniform_int(int n) {
        int v = static_cast<int>(uniform01() * n);
        return v < n ? v : n - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace gridconf
