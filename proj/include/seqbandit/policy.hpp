#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "seqbandit/rng.hpp"
#include "seqbandit/types.hpp"

namespace seqbandit {

struct StepContext {
    InputContext input;
    int position = 0;   // 0-based step index, < max_len
    int prev_token = -1; // -1 marks beginning-of-sequence
};

// Maps a step context and candidate token to the feature ids whose weights
// score that token. Implementations must be deterministic.
class FeatureMap {
public:
    virtual ~FeatureMap() = default;
    virtual void step_features(const StepContext& ctx, int token,
                               std::vector<std::size_t>& out) const = 0;
    // stable string stored in checkpoints; parsed back by make_feature_map
    virtual std::string descriptor() const = 0;
};

// One feature per (input id, position, previous token, candidate token):
// full tabular capacity, so optimization artifacts are attributable to the
// objectives rather than to model bias.
class TabularFeatureMap : public FeatureMap {
public:
    TabularFeatureMap(int vocab_size, int max_len);
    void step_features(const StepContext& ctx, int token,
                       std::vector<std::size_t>& out) const override;
    std::string descriptor() const override;

private:
    int vocab_size_;
    int max_len_;
};

// Hashed alternative behind the same interface: each (input, position,
// previous, token) tuple hashes into a fixed bucket space.
class HashedFeatureMap : public FeatureMap {
public:
    HashedFeatureMap(std::size_t buckets);
    void step_features(const StepContext& ctx, int token,
                       std::vector<std::size_t>& out) const override;
    std::string descriptor() const override;

private:
    std::size_t buckets_;
};

std::shared_ptr<const FeatureMap> make_feature_map(const std::string& descriptor,
                                                   int vocab_size, int max_len);

// Locally-normalized left-to-right sequence policy: a softmax over the
// vocabulary at every step, scores linear in the weights.
class SequencePolicy {
public:
    SequencePolicy() = default;
    SequencePolicy(Vocabulary vocab, int max_len,
                   std::shared_ptr<const FeatureMap> features = nullptr);

    int vocab_size() const { return vocab_.size; }
    int max_len() const { return max_len_; }
    const FeatureMap& features() const { return *features_; }
    std::shared_ptr<const FeatureMap> features_ptr() const { return features_; }

    Weights& weights() { return weights_; }
    const Weights& weights() const { return weights_; }

private:
    Vocabulary vocab_;
    int max_len_ = 0;
    std::shared_ptr<const FeatureMap> features_;
    Weights weights_;
};

// Per-step token distribution (softmax of summed feature weights).
std::vector<double> token_distribution(const SequencePolicy& policy, const StepContext& ctx);

// log pi(y|x): sum of per-step log-probabilities; all internal probability
// accumulation is done in log space.
double sequence_log_probability(const SequencePolicy& policy, const InputContext& x,
                                const Sequence& y);
double sequence_probability(const SequencePolicy& policy, const InputContext& x,
                            const Sequence& y);

// Length-max_len argmax decode; ties break toward the lowest token id so
// logs are reproducible.
Sequence greedy_decode(const SequencePolicy& policy, const InputContext& x);

// Stepwise sample; the returned propensity is sequence_probability of the
// drawn sequence computed through the same code path (exact equality).
std::pair<Sequence, double> sample_sequence(const SequencePolicy& policy,
                                            const InputContext& x, Rng& rng);

// Gradient of log sequence_probability w.r.t. the weights: per step each
// token's features receive (indicator of chosen token - token probability).
SparseVec log_prob_gradient(const SequencePolicy& policy, const InputContext& x,
                            const Sequence& y);

// Visits every length-max_len sequence in lexicographic order. Throws
// EnumerationLimitError when vocab^max_len exceeds limit.
void enumerate_sequences(int vocab_size, int max_len, double limit,
                         const std::function<void(const Sequence&)>& visit);

} // namespace seqbandit
