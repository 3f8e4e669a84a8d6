#ifndef ODES_RNG_HPP
#define ODES_RNG_HPP

#include <cmath>
#include <cstdint>

namespace odes {

// Counter-based generator built on the splitmix64 output function: draw i of
// stream `key` is mix(key + i * GAMMA), so streams with distinct keys are
// independent and any draw can be produced without generating its
// predecessors. Replications seeded through derive_seed() therefore have
// disjoint streams and can run in any order.
class CounterRng {
  public:
    explicit CounterRng(uint64_t key) : key_(key), counter_(0) {}

    uint64_t next_u64() { return mix(key_ + (++counter_) * GAMMA); }

    // uniform on [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller (pair cached)
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * PI * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

  private:
    static constexpr uint64_t GAMMA = 0x9e3779b97f4a7c15ULL;
    static constexpr double PI = 3.14159265358979323846;
    uint64_t key_;
    uint64_t counter_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Key for the (n, replication) cell of an experiment ladder.
inline uint64_t derive_seed(uint64_t config_seed, uint64_t n, uint64_t replication) {
    uint64_t h = CounterRng::mix(config_seed ^ 0x243f6a8885a308d3ULL);
    h = CounterRng::mix(h ^ n);
    h = CounterRng::mix(h ^ (replication * 0x452821e638d01377ULL + 1));
    return h;
}

}  // namespace odes

#endif
