#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace glead {

// Deterministic RNG used everywhere instead of std distributions: the std
// ones keep hidden state (Box-Muller caches) and their output is not pinned
// by the standard, which breaks checkpoint resume and seed reproducibility.
// Every draw here is a pure function of the engine state.
class Rng {
public:
    Rng() : engine_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Stable per-stream seeding: independent streams derived from a base seed
    // and a label (e.g. a parameter path), so adding parameters to one module
    // never shifts the init draws of another.
    static Rng from_label(uint64_t seed, const std::string& label) {
        uint64_t h = 1469598103934665603ull;  // FNV-1a
        for (unsigned char c : label) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= seed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return Rng(h);
    }

    double uniform() {  // [0,1)
        return double(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller, both values derived per call and the second discarded.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    uint64_t next_u64() { return engine_(); }

    // index in [0, n)
    uint64_t index(uint64_t n) { return n ? engine_() % n : 0; }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void deserialize(const std::string& s) {
        std::istringstream is(s);
        is >> engine_;
    }

    bool operator==(const Rng& o) const { return engine_ == o.engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace glead
