#include "seqbandit/rng.hpp"

#include <cmath>
#include <numbers>

namespace seqbandit {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + stream * 0x9E3779B97F4A7C15ULL + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::normal(double sigma) {
    // u1 in (0, 1] so the log is finite
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::categorical(const std::vector<double>& probs) {
    double u = uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) return static_cast<int>(i);
    }
    // guards against cumulative rounding just below 1
    return static_cast<int>(probs.size()) - 1;
}

} // namespace seqbandit
