#include "seqbandit/objectives.hpp"

#include <cmath>

#include "seqbandit/rng.hpp"

namespace seqbandit {

LossReport mle_loss(const SequencePolicy& policy,
                    const std::vector<std::pair<InputContext, Sequence>>& pairs) {
    if (pairs.empty()) throw DataError("mle_loss: empty pair list");
    LossReport report;
    double n = static_cast<double>(pairs.size());
    for (const auto& [x, y] : pairs) {
        report.loss -= sequence_log_probability(policy, x, y) / n;
        add_scaled(report.gradient, log_prob_gradient(policy, x, y), -1.0 / n);
        report.per_record_weights.push_back(1.0);
    }
    return report;
}

namespace {

// Shared core of the linear-in-pi objectives: loss = -(1/T) sum coeff_t * pi_t,
// gradient via pi * grad log pi.
LossReport weighted_pi_loss(const SequencePolicy& policy, const InteractionLog& log,
                            const std::vector<double>& coefficients) {
    LossReport report;
    report.per_record_weights = coefficients;
    double t_count = static_cast<double>(log.records.size());
    for (std::size_t t = 0; t < log.records.size(); ++t) {
        const auto& rec = log.records[t];
        double pi = sequence_probability(policy, rec.input, rec.output);
        double scale = -coefficients[t] * pi / t_count;
        report.loss += scale;
        if (scale != 0.0)
            add_scaled(report.gradient, log_prob_gradient(policy, rec.input, rec.output), scale);
    }
    return report;
}

void require_nonempty(const InteractionLog& log, const char* op) {
    if (log.records.empty()) throw DataError(std::string(op) + ": empty log");
}

} // namespace

LossReport ips_loss(const SequencePolicy& policy, const InteractionLog& log,
                    double max_weight) {
    require_nonempty(log, "ips_loss");
    std::vector<double> coefficients;
    coefficients.reserve(log.records.size());
    for (const auto& rec : log.records) {
        if (!(rec.mu > 0.0))
            throw DataError("ips_loss: record has non-positive propensity");
        coefficients.push_back(rec.delta / rec.mu);
    }
    if (std::isinf(max_weight)) return weighted_pi_loss(policy, log, coefficients);

    // capped variant: records whose importance weight pi/mu exceeds the cap
    // contribute a constant delta * max_weight (zero gradient); the cap buys
    // variance reduction at the price of under-crediting those records
    if (!(max_weight > 0.0)) throw ConfigError("ips_loss: max_weight must be positive");
    LossReport report;
    report.per_record_weights = coefficients;
    double t_count = static_cast<double>(log.records.size());
    for (std::size_t t = 0; t < log.records.size(); ++t) {
        const auto& rec = log.records[t];
        double pi = sequence_probability(policy, rec.input, rec.output);
        double weight = pi / rec.mu;
        if (weight > max_weight) {
            report.loss -= rec.delta * max_weight / t_count;
            continue;
        }
        double scale = -coefficients[t] * pi / t_count;
        report.loss += scale;
        if (scale != 0.0)
            add_scaled(report.gradient, log_prob_gradient(policy, rec.input, rec.output), scale);
    }
    return report;
}

LossReport dpm_loss(const SequencePolicy& policy, const InteractionLog& log) {
    require_nonempty(log, "dpm_loss");
    std::vector<double> coefficients;
    coefficients.reserve(log.records.size());
    for (const auto& rec : log.records) coefficients.push_back(rec.delta);
    return weighted_pi_loss(policy, log, coefficients);
}

LossReport osl_loss(const SequencePolicy& policy, const InteractionLog& batch,
                    const InteractionLog& full_log, const SequencePolicy& stale_policy) {
    require_nonempty(batch, "osl_loss");
    require_nonempty(full_log, "osl_loss");
    if (batch.records.size() > full_log.records.size())
        throw DataError("osl_loss: batch larger than the full log");
    double denominator = 0.0;
    for (const auto& rec : full_log.records)
        denominator += sequence_probability(stale_policy, rec.input, rec.output);
    denominator /= static_cast<double>(full_log.records.size());
    if (denominator < 1e-300)
        throw NumericError("osl_loss: stale-policy denominator is degenerate");

    // numerator is DPM on the batch; the denominator stays a constant in
    // the gradient (one-step-late reweighting)
    std::vector<double> coefficients;
    coefficients.reserve(batch.records.size());
    for (const auto& rec : batch.records) coefficients.push_back(rec.delta / denominator);
    return weighted_pi_loss(policy, batch, coefficients);
}

std::vector<double> baseline_center(const InteractionLog& log) {
    std::vector<double> centered;
    centered.reserve(log.records.size());
    double running_sum = 0.0;
    for (std::size_t t = 0; t < log.records.size(); ++t) {
        running_sum += log.records[t].delta;
        double running_mean = running_sum / static_cast<double>(t + 1);
        centered.push_back(log.records[t].delta - running_mean);
    }
    return centered;
}

LossReport dpm_baseline_loss(const SequencePolicy& policy, const InteractionLog& log) {
    require_nonempty(log, "dpm_baseline_loss");
    return weighted_pi_loss(policy, log, baseline_center(log));
}

LossReport ips_baseline_loss(const SequencePolicy& policy, const InteractionLog& log) {
    require_nonempty(log, "ips_baseline_loss");
    std::vector<double> coefficients = baseline_center(log);
    for (std::size_t t = 0; t < log.records.size(); ++t) {
        if (!(log.records[t].mu > 0.0))
            throw DataError("ips_baseline_loss: record has non-positive propensity");
        coefficients[t] /= log.records[t].mu;
    }
    return weighted_pi_loss(policy, log, coefficients);
}

LossReport dr_loss(const SequencePolicy& policy, const InteractionLog& log,
                   const RewardEstimator& estimator, const DrOptions& options) {
    require_nonempty(log, "dr_loss");
    LossReport report;
    double t_count = static_cast<double>(log.records.size());
    double space = std::pow(static_cast<double>(policy.vocab_size()),
                            static_cast<double>(policy.max_len()));
    bool enumerable = space <= options.enumeration_limit;

    for (std::size_t t = 0; t < log.records.size(); ++t) {
        const auto& rec = log.records[t];
        double estimate = estimator.predict(rec.input, rec.output);
        double residual = rec.delta - estimate;
        report.per_record_weights.push_back(residual);

        double pi = sequence_probability(policy, rec.input, rec.output);
        report.loss -= residual * pi / t_count;
        if (residual != 0.0)
            add_scaled(report.gradient, log_prob_gradient(policy, rec.input, rec.output),
                       -residual * pi / t_count);

        if (enumerable) {
            enumerate_sequences(policy.vocab_size(), policy.max_len(), options.enumeration_limit,
                                [&](const Sequence& y) {
                double dhat = estimator.predict(rec.input, y);
                if (dhat == 0.0) return;
                double p = sequence_probability(policy, rec.input, y);
                report.loss -= dhat * p / t_count;
                add_scaled(report.gradient, log_prob_gradient(policy, rec.input, y),
                           -dhat * p / t_count);
            });
        } else {
            // Monte Carlo direct term over seeded draws; the gradient is the
            // score-function estimator of the enumerated term's gradient,
            // not the derivative of this sampled value (which is piecewise
            // constant under a fixed seed)
            Rng rng(derive_seed(options.seed, 100 + t));
            double k = static_cast<double>(options.sample_count);
            for (int s = 0; s < options.sample_count; ++s) {
                auto [y, propensity] = sample_sequence(policy, rec.input, rng);
                (void)propensity;
                double dhat = estimator.predict(rec.input, y);
                report.loss -= dhat / (k * t_count);
                if (dhat != 0.0)
                    add_scaled(report.gradient, log_prob_gradient(policy, rec.input, y),
                               -dhat / (k * t_count));
            }
        }
    }
    return report;
}

double value_brute_force(const SequencePolicy& policy, const TaskSpec& task) {
    task.validate();
    double value = 0.0;
    for (std::size_t i = 0; i < task.inputs.size(); ++i) {
        const InputContext& x = task.inputs[i];
        double input_value = 0.0;
        enumerate_sequences(task.vocab.size, task.max_len, 1e5, [&](const Sequence& y) {
            input_value += sequence_probability(policy, x, y) * true_reward(task, x, y);
        });
        value += task.input_weights[i] * input_value;
    }
    return value;
}

MonteCarloValue value_monte_carlo(const SequencePolicy& policy, const TaskSpec& task,
                                  int samples, std::uint64_t seed) {
    task.validate();
    if (samples < 2) throw ConfigError("value_monte_carlo: need at least 2 samples");
    Rng rng(seed);
    double sum = 0.0, sum_sq = 0.0;
    for (int s = 0; s < samples; ++s) {
        const InputContext& x =
            task.inputs[static_cast<std::size_t>(rng.categorical(task.input_weights))];
        auto [y, propensity] = sample_sequence(policy, x, rng);
        (void)propensity;
        double r = true_reward(task, x, y);
        sum += r;
        sum_sq += r * r;
    }
    double n = static_cast<double>(samples);
    double mean = sum / n;
    double variance = std::max(0.0, sum_sq / n - mean * mean);
    MonteCarloValue out;
    out.value = mean;
    out.std_error = std::sqrt(variance / n);
    out.samples = samples;
    return out;
}

double value_self_normalized(const SequencePolicy& policy, const InteractionLog& log) {
    require_nonempty(log, "value_self_normalized");
    double weighted = 0.0, total = 0.0;
    for (const auto& rec : log.records) {
        if (!(rec.mu > 0.0))
            throw DataError("value_self_normalized: record has non-positive propensity");
        double w = sequence_probability(policy, rec.input, rec.output) / rec.mu;
        weighted += rec.delta * w;
        total += w;
    }
    if (total < 1e-300)
        throw NumericError("value_self_normalized: total importance weight is degenerate");
    return weighted / total;
}

} // namespace seqbandit
