#include "seqbandit/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqbandit {

void RewardEstimator::features(const InputContext& x, const Sequence& y,
                               std::vector<std::size_t>& out) const {
    // unigrams (input, position, token) on even ids, adjacent-position
    // bigrams (input, position, token, next token) on odd ids, so the two
    // families never collide regardless of input-id range
    std::size_t v = static_cast<std::size_t>(vocab_size);
    std::size_t m = static_cast<std::size_t>(max_len);
    std::size_t input = static_cast<std::size_t>(x.id);
    for (std::size_t j = 0; j < y.size(); ++j) {
        std::size_t uni = (input * m + j) * v + static_cast<std::size_t>(y[j]);
        out.push_back(uni * 2);
    }
    for (std::size_t j = 0; j + 1 < y.size(); ++j) {
        std::size_t bi = ((input * m + j) * v + static_cast<std::size_t>(y[j])) * v +
                         static_cast<std::size_t>(y[j + 1]);
        out.push_back(bi * 2 + 1);
    }
}

double RewardEstimator::score(const InputContext& x, const Sequence& y) const {
    std::vector<std::size_t> feats;
    features(x, y, feats);
    double s = 0.0;
    for (std::size_t f : feats) s += weight_at(weights, f);
    return s;
}

double RewardEstimator::predict(const InputContext& x, const Sequence& y) const {
    return std::min(1.0, std::max(0.0, score(x, y)));
}

LossReportLite mse_loss(const RewardEstimator& estimator,
                        const std::vector<RewardExample>& records) {
    if (records.empty()) throw DataError("mse_loss: empty record list");
    LossReportLite report;
    double n = static_cast<double>(records.size());
    std::vector<std::size_t> feats;
    for (const auto& rec : records) {
        double residual = estimator.score(rec.input, rec.output) - rec.delta;
        report.loss += residual * residual / n;
        report.per_record_weights.push_back(residual);
        feats.clear();
        estimator.features(rec.input, rec.output, feats);
        for (std::size_t f : feats) report.gradient[f] += 2.0 * residual / n;
    }
    return report;
}

FitResult fit_reward_estimator(const std::vector<RewardExample>& records,
                               int vocab_size, int max_len, const FitOptions& options) {
    if (records.empty()) throw DataError("fit_reward_estimator: empty record list");
    if (options.lr < 0.0) throw ConfigError("fit.lr: must be non-negative");
    if (options.epochs < 0) throw ConfigError("fit.epochs: must be non-negative");
    for (const auto& rec : records) {
        if (rec.output.empty() || static_cast<int>(rec.output.size()) > max_len)
            throw DataError("fit_reward_estimator: record sequence length out of range");
        for (int tok : rec.output)
            if (tok < 0 || tok >= vocab_size)
                throw DataError("fit_reward_estimator: token id outside vocabulary");
    }

    FitResult result;
    result.estimator.vocab_size = vocab_size;
    result.estimator.max_len = max_len;
    result.loss_trace.reserve(static_cast<std::size_t>(options.epochs) + 1);
    result.loss_trace.push_back(mse_loss(result.estimator, records).loss);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        LossReportLite report = mse_loss(result.estimator, records);
        for (const auto& [f, g] : report.gradient) result.estimator.weights[f] -= options.lr * g;
        result.loss_trace.push_back(mse_loss(result.estimator, records).loss);
        if (!std::isfinite(result.loss_trace.back()))
            throw NumericError("fit_reward_estimator: non-finite training loss");
    }
    return result;
}

} // namespace seqbandit
