#pragma once

#include <cstdint>
#include <vector>

#include "seqbandit/types.hpp"

namespace seqbandit {

struct RewardExample {
    InputContext input;
    Sequence output;
    double delta = 0.0;
};

// Linear reward estimator over bag-of-feature representations of (x, y):
// unigram features (input, position, token) plus adjacent-position token
// bigrams. Predictions are clamped to [0,1]; training runs on the raw
// linear score so the objective stays smooth.
struct RewardEstimator {
    int vocab_size = 0;
    int max_len = 0;
    Weights weights;

    void features(const InputContext& x, const Sequence& y,
                  std::vector<std::size_t>& out) const;
    double score(const InputContext& x, const Sequence& y) const;   // raw linear
    double predict(const InputContext& x, const Sequence& y) const; // clamped to [0,1]
};

struct LossReportLite {
    double loss = 0.0;
    SparseVec gradient;
    std::vector<double> per_record_weights; // residuals, one per record
};

// Mean squared error (1/N) sum (score - delta)^2 with its analytic gradient.
LossReportLite mse_loss(const RewardEstimator& estimator,
                        const std::vector<RewardExample>& records);

struct FitOptions {
    int epochs = 500;
    double lr = 0.1;
    std::uint64_t seed = 0; // reserved for stochastic variants; full-batch fit is seed-free
};

struct FitResult {
    RewardEstimator estimator;
    std::vector<double> loss_trace; // MSE at init, then after every epoch
};

// Full-batch gradient descent from zero weights. The trace is monotone
// non-increasing whenever lr < 1 / (max active features per record).
FitResult fit_reward_estimator(const std::vector<RewardExample>& records,
                               int vocab_size, int max_len, const FitOptions& options);

} // namespace seqbandit
