#pragma once

// Shared test fixtures and independent oracles. The oracles deliberately
// avoid the library code paths they are checking: plain linear-space
// products instead of log-space, odometer loops instead of
// enumerate_sequences, direct pair summation instead of the coincidence
// matrix.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "seqbandit/objectives.hpp"
#include "seqbandit/policy.hpp"
#include "seqbandit/rng.hpp"
#include "seqbandit/simkit.hpp"

namespace testutil {

using namespace seqbandit;

// Every length-max_len sequence over {0..vocab_size-1}, lexicographic.
inline std::vector<Sequence> all_sequences(int vocab_size, int max_len) {
    std::vector<Sequence> out;
    Sequence y(static_cast<std::size_t>(max_len), 0);
    while (true) {
        out.push_back(y);
        int pos = max_len - 1;
        while (pos >= 0 && ++y[static_cast<std::size_t>(pos)] == vocab_size) {
            y[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return out;
}

// Sequence probability as a plain product of step distributions.
inline double product_probability(const SequencePolicy& policy, const InputContext& x,
                                  const Sequence& y) {
    double p = 1.0;
    int prev = -1;
    for (std::size_t j = 0; j < y.size(); ++j) {
        StepContext ctx{x, static_cast<int>(j), prev};
        p *= token_distribution(policy, ctx)[static_cast<std::size_t>(y[j])];
        prev = y[j];
    }
    return p;
}

// Expected true reward by exhaustive enumeration, independent of
// value_brute_force.
inline double oracle_value(const SequencePolicy& policy, const TaskSpec& task) {
    double value = 0.0;
    for (std::size_t i = 0; i < task.inputs.size(); ++i) {
        double inner = 0.0;
        for (const Sequence& y : all_sequences(task.vocab.size, task.max_len))
            inner += product_probability(policy, task.inputs[i], y) *
                     true_reward(task, task.inputs[i], y);
        value += task.input_weights[i] * inner;
    }
    return value;
}

// Gaussian weights on every tabular feature reachable from the task inputs.
inline SequencePolicy random_policy(const TaskSpec& task, double sigma, std::uint64_t seed) {
    SequencePolicy policy(Vocabulary{task.vocab.size}, task.max_len);
    Rng rng(seed);
    std::vector<std::size_t> feats;
    for (const auto& input : task.inputs)
        for (int pos = 0; pos < task.max_len; ++pos)
            for (int prev = -1; prev < task.vocab.size; ++prev)
                for (int tok = 0; tok < task.vocab.size; ++tok) {
                    StepContext ctx{input, pos, prev};
                    feats.clear();
                    policy.features().step_features(ctx, tok, feats);
                    for (std::size_t f : feats) policy.weights()[f] = rng.normal(sigma);
                }
    return policy;
}

// Central finite difference of an arbitrary scalar of the policy weights.
inline double finite_difference(const std::function<double(const SequencePolicy&)>& f,
                                const SequencePolicy& policy, std::size_t feature, double h) {
    SequencePolicy probe = policy;
    probe.weights()[feature] = weight_at(policy.weights(), feature) + h;
    double up = f(probe);
    probe.weights()[feature] = weight_at(policy.weights(), feature) - h;
    double down = f(probe);
    return (up - down) / (2.0 * h);
}

// Krippendorff's alpha by direct summation over ordered value pairs
// (interval metric), straight from the definition.
inline double alpha_direct(const std::vector<std::vector<std::optional<double>>>& table) {
    std::size_t items = 0;
    for (const auto& row : table) items = std::max(items, row.size());

    double observed_num = 0.0; // sum over units of pair disagreement / (m_u - 1)
    double n_total = 0.0;      // pairable values
    std::vector<double> pool;
    for (std::size_t item = 0; item < items; ++item) {
        std::vector<double> unit;
        for (const auto& row : table)
            if (item < row.size() && row[item]) unit.push_back(*row[item]);
        if (unit.size() < 2) continue;
        double m = static_cast<double>(unit.size());
        for (double a : unit)
            for (double b : unit) observed_num += (a - b) * (a - b) / (m - 1.0);
        n_total += m;
        pool.insert(pool.end(), unit.begin(), unit.end());
    }
    double expected_num = 0.0;
    for (double a : pool)
        for (double b : pool) expected_num += (a - b) * (a - b);
    double observed = observed_num / n_total;
    double expected = expected_num / (n_total * (n_total - 1.0));
    if (expected == 0.0) return 1.0;
    return 1.0 - observed / expected;
}

// Hand-assembled log over one task input; mus default to 1.
inline InteractionLog manual_log(const TaskSpec& task,
                                 const std::vector<std::pair<Sequence, double>>& entries) {
    InteractionLog log;
    log.mode = LoggingMode::deterministic;
    for (const auto& [y, delta] : entries) {
        LoggedInteraction rec;
        rec.input = task.inputs.at(0);
        rec.output = y;
        rec.delta = delta;
        rec.mu = 1.0;
        log.records.push_back(rec);
    }
    return log;
}

} // namespace testutil
