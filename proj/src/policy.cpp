#include "seqbandit/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqbandit {

TabularFeatureMap::TabularFeatureMap(int vocab_size, int max_len)
    : vocab_size_(vocab_size), max_len_(max_len) {}

void TabularFeatureMap::step_features(const StepContext& ctx, int token,
                                      std::vector<std::size_t>& out) const {
    // one-hot over (input id, position, previous token, candidate token);
    // prev_token is shifted by 1 so the BOS marker -1 gets its own slot
    std::size_t v = static_cast<std::size_t>(vocab_size_);
    std::size_t id = static_cast<std::size_t>(ctx.input.id);
    id = id * static_cast<std::size_t>(max_len_) + static_cast<std::size_t>(ctx.position);
    id = id * (v + 1) + static_cast<std::size_t>(ctx.prev_token + 1);
    id = id * v + static_cast<std::size_t>(token);
    out.push_back(id);
}

std::string TabularFeatureMap::descriptor() const { return "tabular"; }

HashedFeatureMap::HashedFeatureMap(std::size_t buckets) : buckets_(buckets) {}

void HashedFeatureMap::step_features(const StepContext& ctx, int token,
                                     std::vector<std::size_t>& out) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ULL;
    auto mix = [&h](std::uint64_t x) {
        h ^= x + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        h *= 0xBF58476D1CE4E5B9ULL;
        h ^= h >> 29;
    };
    mix(static_cast<std::uint64_t>(ctx.input.id));
    mix(static_cast<std::uint64_t>(ctx.position));
    mix(static_cast<std::uint64_t>(ctx.prev_token + 1));
    mix(static_cast<std::uint64_t>(token));
    out.push_back(static_cast<std::size_t>(h % buckets_));
}

std::string HashedFeatureMap::descriptor() const {
    return "hashed:" + std::to_string(buckets_);
}

std::shared_ptr<const FeatureMap> make_feature_map(const std::string& descriptor,
                                                   int vocab_size, int max_len) {
    if (descriptor == "tabular")
        return std::make_shared<TabularFeatureMap>(vocab_size, max_len);
    if (descriptor.rfind("hashed:", 0) == 0) {
        std::size_t buckets = std::stoull(descriptor.substr(7));
        if (buckets == 0) throw ConfigError("feature map 'hashed': bucket count must be positive");
        return std::make_shared<HashedFeatureMap>(buckets);
    }
    throw ConfigError("unknown feature map descriptor '" + descriptor + "'");
}

SequencePolicy::SequencePolicy(Vocabulary vocab, int max_len,
                               std::shared_ptr<const FeatureMap> features)
    : vocab_(vocab), max_len_(max_len), features_(std::move(features)) {
    if (vocab_.size < 2) throw ConfigError("vocabulary size must be at least 2");
    if (max_len_ < 1) throw ConfigError("sequence length bound must be at least 1");
    if (!features_) features_ = std::make_shared<TabularFeatureMap>(vocab_.size, max_len_);
}

namespace {

// log-softmax of the step scores; returns log-probabilities so sequence
// products stay in log space
std::vector<double> step_log_probs(const SequencePolicy& policy, const StepContext& ctx) {
    if (ctx.position >= policy.max_len())
        throw std::out_of_range("step position " + std::to_string(ctx.position) +
                                " out of range for length bound " +
                                std::to_string(policy.max_len()));
    int v = policy.vocab_size();
    std::vector<double> scores(static_cast<std::size_t>(v), 0.0);
    std::vector<std::size_t> feats;
    for (int tok = 0; tok < v; ++tok) {
        feats.clear();
        policy.features().step_features(ctx, tok, feats);
        double s = 0.0;
        for (std::size_t f : feats) s += weight_at(policy.weights(), f);
        scores[static_cast<std::size_t>(tok)] = s;
    }
    double max_score = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    for (double s : scores) z += std::exp(s - max_score);
    double log_z = max_score + std::log(z);
    for (double& s : scores) s -= log_z;
    return scores; // now log-probabilities
}

void check_sequence(const SequencePolicy& policy, const Sequence& y) {
    if (static_cast<int>(y.size()) != policy.max_len())
        throw std::domain_error("sequence length " + std::to_string(y.size()) +
                                " does not match the fixed length " +
                                std::to_string(policy.max_len()));
    for (int tok : y)
        if (tok < 0 || tok >= policy.vocab_size())
            throw std::domain_error("token id " + std::to_string(tok) +
                                    " outside vocabulary of size " +
                                    std::to_string(policy.vocab_size()));
}

} // namespace

std::vector<double> token_distribution(const SequencePolicy& policy, const StepContext& ctx) {
    std::vector<double> log_probs = step_log_probs(policy, ctx);
    for (double& lp : log_probs) lp = std::exp(lp);
    return log_probs;
}

double sequence_log_probability(const SequencePolicy& policy, const InputContext& x,
                                const Sequence& y) {
    check_sequence(policy, y);
    double log_p = 0.0;
    StepContext ctx{x, 0, -1};
    for (std::size_t j = 0; j < y.size(); ++j) {
        ctx.position = static_cast<int>(j);
        ctx.prev_token = j == 0 ? -1 : y[j - 1];
        log_p += step_log_probs(policy, ctx)[static_cast<std::size_t>(y[j])];
    }
    return log_p;
}

double sequence_probability(const SequencePolicy& policy, const InputContext& x,
                            const Sequence& y) {
    return std::exp(sequence_log_probability(policy, x, y));
}

Sequence greedy_decode(const SequencePolicy& policy, const InputContext& x) {
    Sequence y;
    y.reserve(static_cast<std::size_t>(policy.max_len()));
    StepContext ctx{x, 0, -1};
    for (int j = 0; j < policy.max_len(); ++j) {
        ctx.position = j;
        ctx.prev_token = j == 0 ? -1 : y.back();
        std::vector<double> probs = token_distribution(policy, ctx);
        int best = 0;
        for (int tok = 1; tok < policy.vocab_size(); ++tok)
            if (probs[static_cast<std::size_t>(tok)] > probs[static_cast<std::size_t>(best)])
                best = tok; // strict > keeps the lowest id on ties
        y.push_back(best);
    }
    return y;
}

std::pair<Sequence, double> sample_sequence(const SequencePolicy& policy,
                                            const InputContext& x, Rng& rng) {
    Sequence y;
    y.reserve(static_cast<std::size_t>(policy.max_len()));
    StepContext ctx{x, 0, -1};
    for (int j = 0; j < policy.max_len(); ++j) {
        ctx.position = j;
        ctx.prev_token = j == 0 ? -1 : y.back();
        y.push_back(rng.categorical(token_distribution(policy, ctx)));
    }
    // recompute through sequence_probability so the recorded propensity is
    // bit-identical to what evaluation will later assign this sequence
    return {y, sequence_probability(policy, x, y)};
}

SparseVec log_prob_gradient(const SequencePolicy& policy, const InputContext& x,
                            const Sequence& y) {
    check_sequence(policy, y);
    SparseVec grad;
    std::vector<std::size_t> feats;
    StepContext ctx{x, 0, -1};
    for (std::size_t j = 0; j < y.size(); ++j) {
        ctx.position = static_cast<int>(j);
        ctx.prev_token = j == 0 ? -1 : y[j - 1];
        std::vector<double> probs = token_distribution(policy, ctx);
        // d log p(y_j) / d w_f = sum_tok (1[tok = y_j] - p(tok)) 1[f active for tok]
        for (int tok = 0; tok < policy.vocab_size(); ++tok) {
            double coeff = (tok == y[j] ? 1.0 : 0.0) - probs[static_cast<std::size_t>(tok)];
            feats.clear();
            policy.features().step_features(ctx, tok, feats);
            for (std::size_t f : feats) grad[f] += coeff;
        }
    }
    return grad;
}

void enumerate_sequences(int vocab_size, int max_len, double limit,
                         const std::function<void(const Sequence&)>& visit) {
    double count = std::pow(static_cast<double>(vocab_size), static_cast<double>(max_len));
    if (count > limit)
        throw EnumerationLimitError("output space of " + std::to_string(vocab_size) + "^" +
                                    std::to_string(max_len) + " sequences exceeds limit");
    Sequence y(static_cast<std::size_t>(max_len), 0);
    for (;;) {
        visit(y);
        int j = max_len - 1;
        while (j >= 0 && y[static_cast<std::size_t>(j)] == vocab_size - 1) {
            y[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
        ++y[static_cast<std::size_t>(j)];
    }
}

} // namespace seqbandit
