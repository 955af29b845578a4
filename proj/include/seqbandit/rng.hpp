#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace seqbandit {

// splitmix64 round; used to derive independent stream seeds from one root
// seed so that e.g. output draws and feedback noise do not share a stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic RNG. mt19937_64 is seeded directly, and uniform/normal are
// built by hand instead of std::*_distribution because the standard leaves
// those implementation-defined and results must be byte-stable across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1) with 53 bits of precision
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Box-Muller, one value per call (no cached spare, so the draw count per
    // event is fixed and streams stay aligned across configurations)
    double normal(double sigma);

    // inverse-CDF draw from an explicit probability vector
    int categorical(const std::vector<double>& probs);

private:
    std::mt19937_64 eng_;
};

} // namespace seqbandit
