#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seqbandit/objectives.hpp"
#include "seqbandit/policy.hpp"
#include "seqbandit/simkit.hpp"

namespace seqbandit {

enum class OptimizerKind { sgd, adam };
enum class EarlyStopKind { none, on_metric };
enum class StopMetric { snips_value, oracle_value };

struct TrainConfig {
    ObjectiveKind objective = ObjectiveKind::dpm;
    double lr = 0.1;
    OptimizerKind optimizer = OptimizerKind::sgd;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int epochs = 100;
    int batch_size = 0; // 0 = full batch
    std::uint64_t seed = 0;
    EarlyStopKind early_stop = EarlyStopKind::none;
    int patience = 5;
    StopMetric metric = StopMetric::snips_value;
    int eval_every = 10;       // steps between trace snapshots
    int osl_refresh_every = 1; // epochs between stale-policy refreshes
    DrOptions dr;

    void validate() const; // throws ConfigError
};

struct TraceRow {
    int step = 0;
    double loss = 0.0;
    double oracle_value = 0.0;
    double snips_value = 0.0;
    double logged_mass = 0.0; // sum_t pi(y_t|x_t) over the log
};

struct RunTrace {
    std::vector<TraceRow> rows;
};

struct TrainResult {
    SequencePolicy policy;
    RunTrace trace;
};

// Minibatch optimization of the configured objective. Deterministic given
// (config, seed, data). With early stopping enabled the best-metric
// snapshot is returned instead of the last iterate.
TrainResult train(const SequencePolicy& init, const InteractionLog& log,
                  const TaskSpec& task, const TrainConfig& config,
                  const RewardEstimator* estimator = nullptr);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t features_checked = 0;
    bool passed = false;
};

// Central finite differences over every active feature of the objective
// closure; error is |g - fd| / max(1, |g|, |fd|).
GradCheckReport gradient_check(const std::function<LossReport(const SequencePolicy&)>& objective,
                               const SequencePolicy& policy, double h, double tolerance);

// Convenience overload wiring up a standard objective on a log.
GradCheckReport gradient_check(ObjectiveKind kind, const SequencePolicy& policy,
                               const InteractionLog& log, double h, double tolerance,
                               const RewardEstimator* estimator = nullptr);

struct PhasedResult {
    TrainResult supervised;
    TrainResult bandit;
};

// Supervised MLE phase on (x, y*) pairs, then a bandit phase continuing
// from the supervised policy.
PhasedResult pretrain_then_bandit(const TaskSpec& task,
                                  const std::vector<std::pair<InputContext, Sequence>>& pairs,
                                  const InteractionLog& log, const TrainConfig& mle_config,
                                  const TrainConfig& bandit_config);

} // namespace seqbandit
