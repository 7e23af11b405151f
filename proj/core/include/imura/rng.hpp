#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace imura {

// splitmix64; used to spread user seeds and derive independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (salt + 1));
    return splitmix64(s);
}

// mt19937_64 wrapper with explicit, platform-independent distributions.
// std::normal_distribution et al. differ between standard libraries; the
// simulator must be reproducible from a seed alone.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed), base_seed_(seed) {}

    Rng substream(std::uint64_t salt) const { return Rng(mix_seed(base_seed_, salt)); }

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), rejection sampled (no modulo bias)
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bit() { return (engine_() >> 63) != 0; }

    // standard normal via Box-Muller, one spare cached
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    std::mt19937_64 engine_;
    std::uint64_t base_seed_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace imura
