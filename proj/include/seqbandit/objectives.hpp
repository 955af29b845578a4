#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "seqbandit/policy.hpp"
#include "seqbandit/reward_model.hpp"
#include "seqbandit/simkit.hpp"
#include "seqbandit/types.hpp"

namespace seqbandit {

enum class ObjectiveKind { mle, ips, dpm, osl, dpm_baseline, ips_baseline, dr };

struct LossReport {
    double loss = 0.0;
    SparseVec gradient;
    // coefficient on pi(y_t|x_t) in the loss, one per record consumed;
    // sign-inspectable (baseline-centered variants go negative)
    std::vector<double> per_record_weights;
};

// Supervised negative log-likelihood: -(1/N) sum log pi(y*|x).
LossReport mle_loss(const SequencePolicy& policy,
                    const std::vector<std::pair<InputContext, Sequence>>& pairs);

// -(1/T) sum delta_t * pi(y_t|x_t) / mu_t. Requires positive propensities.
// max_weight caps the importance weight pi/mu (no cap by default; capping
// trades variance for a pessimistic bias on the capped records).
LossReport ips_loss(const SequencePolicy& policy, const InteractionLog& log,
                    double max_weight = std::numeric_limits<double>::infinity());

// -(1/T) sum delta_t * pi(y_t|x_t): propensities treated as 1 throughout
// (deterministic logging convention).
LossReport dpm_loss(const SequencePolicy& policy, const InteractionLog& log);

// Self-normalized variant with a one-step-late denominator:
//   -[(1/B) sum_batch delta pi_theta] / [(1/T) sum_log pi_stale].
// The denominator is a constant in the gradient.
LossReport osl_loss(const SequencePolicy& policy, const InteractionLog& batch,
                    const InteractionLog& full_log, const SequencePolicy& stale_policy);

// Running-average reward centering: delta_t - mean(delta_1..delta_t), the
// mean including the current record (so the first is always 0).
std::vector<double> baseline_center(const InteractionLog& log);

// DPM / IPS with baseline-centered rewards.
LossReport dpm_baseline_loss(const SequencePolicy& policy, const InteractionLog& log);
LossReport ips_baseline_loss(const SequencePolicy& policy, const InteractionLog& log);

struct DrOptions {
    double enumeration_limit = 1e5; // enumerate the direct term while vocab^M <= this
    int sample_count = 16;          // Monte Carlo fallback draws
    std::uint64_t seed = 0;
};

// Doubly robust objective:
//   -(1/T) sum_t [ (delta_t - dhat(x_t,y_t)) pi(y_t|x_t) + sum_y' dhat(x_t,y') pi(y'|x_t) ]
// with the direct term enumerated when feasible, otherwise estimated from
// sample_count seeded draws.
LossReport dr_loss(const SequencePolicy& policy, const InteractionLog& log,
                   const RewardEstimator& estimator, const DrOptions& options = {});

// Exact expected reward V(pi) = sum_x p(x) sum_y pi(y|x) delta*(x,y) by
// enumeration; refuses via EnumerationLimitError above 1e5 sequences per input.
double value_brute_force(const SequencePolicy& policy, const TaskSpec& task);

// Monte Carlo estimate for spaces too large to enumerate.
struct MonteCarloValue {
    double value = 0.0;
    double std_error = 0.0;
    int samples = 0;
};
MonteCarloValue value_monte_carlo(const SequencePolicy& policy, const TaskSpec& task,
                                  int samples, std::uint64_t seed);

// Self-normalized value estimate sum(delta w) / sum(w), w = pi/mu.
double value_self_normalized(const SequencePolicy& policy, const InteractionLog& log);

} // namespace seqbandit
