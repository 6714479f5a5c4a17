#ifndef FPA_RNG_HPP
#define FPA_RNG_HPP

#include <cmath>
#include <cstdint>

namespace fpa {

// Stateless counter-based generator: a splitmix64 avalanche over the key
// words (seed, stream, step, index, draw). Any (key -> value) lookup is O(1)
// and independent of evaluation order, so threaded trajectories stay
// bit-identical.
struct CounterRng {
    std::uint64_t seed = 0;

    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t bits(std::uint64_t stream, std::uint64_t step, std::uint64_t index,
                       std::uint64_t draw) const {
        std::uint64_t h = splitmix(seed ^ 0x8BADF00DDEADBEEFULL);
        h = splitmix(h ^ stream);
        h = splitmix(h ^ step);
        h = splitmix(h ^ index);
        h = splitmix(h ^ draw);
        return h;
    }

    // Uniform in the open interval (0,1); never 0, safe under log.
    double uniform(std::uint64_t stream, std::uint64_t step, std::uint64_t index,
                   std::uint64_t draw) const {
        return (static_cast<double>(bits(stream, step, index, draw) >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes draws 2*pair and 2*pair+1.
    double normal(std::uint64_t stream, std::uint64_t step, std::uint64_t index,
                  std::uint64_t pair = 0) const {
        const double u1 = uniform(stream, step, index, 2 * pair);
        const double u2 = uniform(stream, step, index, 2 * pair + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
};

// Stream tags keep independent purposes from colliding on one seed.
namespace rng_stream {
constexpr std::uint64_t em_noise = 1;
constexpr std::uint64_t init_sample = 2;
}  // namespace rng_stream

}  // namespace fpa

#endif
