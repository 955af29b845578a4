#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqbandit {

// Token ids are dense integers 0..vocab_size-1.
using Sequence = std::vector<int>;

// Error taxonomy mirrored by the CLI exit codes (2/3/4).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Thrown when an exact computation would have to enumerate more than the
// caller's limit; callers that can fall back to sampling catch this.
struct EnumerationLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vocabulary {
    int size = 0; // ids are contiguous from 0
};

struct InputContext {
    int id = 0;
    std::vector<int> tokens; // optional source-side tokens; unused by the tabular feature map
};

// Sparse vectors keyed by feature id. std::map keeps iteration order
// deterministic, which keeps serialized artifacts byte-stable.
using SparseVec = std::map<std::size_t, double>;
using Weights = std::map<std::size_t, double>;

inline double weight_at(const Weights& w, std::size_t key) {
    auto it = w.find(key);
    return it == w.end() ? 0.0 : it->second;
}

// dst += scale * src, skipping exact zeros so that "zero gradient" stays an
// empty map instead of a map full of zeros.
inline void add_scaled(SparseVec& dst, const SparseVec& src, double scale) {
    if (scale == 0.0) return;
    for (const auto& [k, v] : src) {
        if (v == 0.0) continue;
        dst[k] += scale * v;
    }
}

} // namespace seqbandit
