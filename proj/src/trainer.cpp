#include "seqbandit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace seqbandit {

void TrainConfig::validate() const {
    // lr == 0 is a documented no-op run; only negative rates are rejected
    if (lr < 0.0) throw ConfigError("train.lr: must be non-negative");
    if (epochs < 0) throw ConfigError("train.epochs: must be non-negative");
    if (batch_size < 0) throw ConfigError("train.batch_size: must be non-negative");
    if (eval_every < 1) throw ConfigError("train.eval_every: must be at least 1");
    if (osl_refresh_every < 1) throw ConfigError("train.osl_refresh_every: must be at least 1");
    if (early_stop == EarlyStopKind::on_metric && patience < 1)
        throw ConfigError("train.patience: must be at least 1");
    if (optimizer == OptimizerKind::adam) {
        if (adam_beta1 < 0.0 || adam_beta1 >= 1.0)
            throw ConfigError("train.adam_beta1: must be in [0,1)");
        if (adam_beta2 < 0.0 || adam_beta2 >= 1.0)
            throw ConfigError("train.adam_beta2: must be in [0,1)");
        if (adam_eps <= 0.0) throw ConfigError("train.adam_eps: must be positive");
    }
}

namespace {

std::vector<std::pair<InputContext, Sequence>> log_as_pairs(const InteractionLog& log) {
    std::vector<std::pair<InputContext, Sequence>> pairs;
    pairs.reserve(log.records.size());
    for (const auto& rec : log.records) pairs.emplace_back(rec.input, rec.output);
    return pairs;
}

LossReport evaluate_objective(ObjectiveKind kind, const SequencePolicy& policy,
                              const InteractionLog& batch, const InteractionLog& full_log,
                              const SequencePolicy& stale, const RewardEstimator* estimator,
                              const DrOptions& dr_options) {
    switch (kind) {
        case ObjectiveKind::mle:
            return mle_loss(policy, log_as_pairs(batch));
        case ObjectiveKind::ips:
            return ips_loss(policy, batch);
        case ObjectiveKind::dpm:
            return dpm_loss(policy, batch);
        case ObjectiveKind::osl:
            return osl_loss(policy, batch, full_log, stale);
        case ObjectiveKind::dpm_baseline:
            return dpm_baseline_loss(policy, batch);
        case ObjectiveKind::ips_baseline:
            return ips_baseline_loss(policy, batch);
        case ObjectiveKind::dr:
            if (!estimator)
                throw ConfigError("train.objective: dr requires a reward estimator");
            return dr_loss(policy, batch, *estimator, dr_options);
    }
    throw ConfigError("train.objective: unknown objective");
}

double logged_mass(const SequencePolicy& policy, const InteractionLog& log) {
    double mass = 0.0;
    for (const auto& rec : log.records)
        mass += sequence_probability(policy, rec.input, rec.output);
    return mass;
}

struct AdamState {
    SparseVec m;
    SparseVec v;
    long t = 0;
};

void apply_update(SequencePolicy& policy, const SparseVec& gradient, const TrainConfig& cfg,
                  AdamState& adam) {
    if (cfg.optimizer == OptimizerKind::sgd) {
        for (const auto& [f, g] : gradient) {
            double update = cfg.lr * g;
            // exact no-op updates (lr 0, zero gradient entries) must not
            // materialize new weight entries
            if (update != 0.0) policy.weights()[f] -= update;
        }
        return;
    }
    if (cfg.lr == 0.0) return;
    ++adam.t;
    double correction1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.t));
    double correction2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.t));
    for (const auto& [f, g] : gradient) {
        double& m = adam.m[f];
        double& v = adam.v[f];
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g * g;
        double m_hat = m / correction1;
        double v_hat = v / correction2;
        policy.weights()[f] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
}

} // namespace

TrainResult train(const SequencePolicy& init, const InteractionLog& log,
                  const TaskSpec& task, const TrainConfig& config,
                  const RewardEstimator* estimator) {
    config.validate();
    if (log.records.empty()) throw DataError("train: empty log");

    SequencePolicy policy = init;
    SequencePolicy stale = init;
    AdamState adam;
    RunTrace trace;

    int t_count = static_cast<int>(log.records.size());
    int batch_size = config.batch_size == 0 ? t_count : std::min(config.batch_size, t_count);
    int steps_per_epoch = (t_count + batch_size - 1) / batch_size;
    int total_steps = config.epochs * steps_per_epoch;

    SequencePolicy best = policy;
    double best_metric = -std::numeric_limits<double>::infinity();
    int since_best = 0;
    bool stopped = false;

    auto record_eval = [&](int step) {
        TraceRow row;
        row.step = step;
        LossReport full = evaluate_objective(config.objective, policy, log, log, stale,
                                             estimator, config.dr);
        row.loss = full.loss;
        try {
            row.oracle_value = value_brute_force(policy, task);
        } catch (const EnumerationLimitError&) {
            row.oracle_value = std::numeric_limits<double>::quiet_NaN();
        }
        try {
            row.snips_value = value_self_normalized(policy, log);
        } catch (const NumericError&) {
            row.snips_value = std::numeric_limits<double>::quiet_NaN();
        }
        row.logged_mass = logged_mass(policy, log);
        trace.rows.push_back(row);

        if (config.early_stop == EarlyStopKind::on_metric) {
            double metric = config.metric == StopMetric::oracle_value ? row.oracle_value
                                                                      : row.snips_value;
            if (metric > best_metric) {
                best_metric = metric;
                best = policy;
                since_best = 0;
            } else if (++since_best >= config.patience) {
                stopped = true;
            }
        }
    };

    int step = 0;
    for (int epoch = 0; epoch < config.epochs && !stopped; ++epoch) {
        if (config.objective == ObjectiveKind::osl && epoch % config.osl_refresh_every == 0)
            stale = policy;
        for (int start = 0; start < t_count && !stopped; start += batch_size) {
            InteractionLog batch;
            batch.mode = log.mode;
            batch.seed = log.seed;
            int end = std::min(start + batch_size, t_count);
            batch.records.assign(log.records.begin() + start, log.records.begin() + end);

            LossReport report = evaluate_objective(config.objective, policy, batch, log, stale,
                                                   estimator, config.dr);
            if (!std::isfinite(report.loss))
                throw NumericError("train: non-finite loss at step " + std::to_string(step));
            for (const auto& [f, g] : report.gradient)
                if (!std::isfinite(g))
                    throw NumericError("train: non-finite gradient at step " +
                                       std::to_string(step));

            apply_update(policy, report.gradient, config, adam);
            ++step;
            if (step % config.eval_every == 0 || step == total_steps) record_eval(step);
        }
    }
    if (step > 0 && (trace.rows.empty() || trace.rows.back().step != step)) record_eval(step);

    TrainResult result;
    result.policy = config.early_stop == EarlyStopKind::on_metric ? best : policy;
    result.trace = std::move(trace);
    return result;
}

GradCheckReport gradient_check(const std::function<LossReport(const SequencePolicy&)>& objective,
                               const SequencePolicy& policy, double h, double tolerance) {
    if (h <= 0.0) throw ConfigError("gradient_check: h must be positive");
    LossReport report = objective(policy);

    // check every feature the analytic gradient touches, plus every feature
    // with a nonzero weight (whose analytic entry may be implicitly zero)
    std::vector<std::size_t> features;
    for (const auto& [f, g] : report.gradient) features.push_back(f);
    for (const auto& [f, w] : policy.weights())
        if (!report.gradient.count(f)) features.push_back(f);

    GradCheckReport out;
    SequencePolicy probe = policy;
    for (std::size_t f : features) {
        double original = weight_at(policy.weights(), f);
        probe.weights()[f] = original + h;
        double loss_plus = objective(probe).loss;
        probe.weights()[f] = original - h;
        double loss_minus = objective(probe).loss;
        probe.weights()[f] = original;
        double fd = (loss_plus - loss_minus) / (2.0 * h);
        double analytic = 0.0;
        if (auto it = report.gradient.find(f); it != report.gradient.end())
            analytic = it->second;
        double err = std::abs(analytic - fd) /
                     std::max({1.0, std::abs(analytic), std::abs(fd)});
        out.max_rel_error = std::max(out.max_rel_error, err);
        ++out.features_checked;
    }
    out.passed = out.max_rel_error <= tolerance;
    return out;
}

GradCheckReport gradient_check(ObjectiveKind kind, const SequencePolicy& policy,
                               const InteractionLog& log, double h, double tolerance,
                               const RewardEstimator* estimator) {
    SequencePolicy stale = policy; // frozen copy: the OSL denominator stays put
    DrOptions dr_options;
    auto objective = [&](const SequencePolicy& p) {
        return evaluate_objective(kind, p, log, log, stale, estimator, dr_options);
    };
    return gradient_check(objective, policy, h, tolerance);
}

PhasedResult pretrain_then_bandit(const TaskSpec& task,
                                  const std::vector<std::pair<InputContext, Sequence>>& pairs,
                                  const InteractionLog& log, const TrainConfig& mle_config,
                                  const TrainConfig& bandit_config) {
    if (pairs.empty()) throw DataError("pretrain_then_bandit: empty supervised set");
    if (mle_config.objective != ObjectiveKind::mle)
        throw ConfigError("pretrain_then_bandit: first phase must use the mle objective");

    // supervised pairs are packaged as a log so both phases share train()
    InteractionLog supervised;
    supervised.mode = LoggingMode::deterministic;
    for (const auto& [x, y] : pairs) {
        LoggedInteraction rec;
        rec.input = x;
        rec.output = y;
        rec.delta = 1.0;
        rec.mu = 1.0;
        supervised.records.push_back(std::move(rec));
    }

    SequencePolicy init(Vocabulary{task.vocab.size}, task.max_len);
    PhasedResult result;
    result.supervised = train(init, supervised, task, mle_config);
    result.bandit = train(result.supervised.policy, log, task, bandit_config);
    return result;
}

} // namespace seqbandit
