#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqbandit/policy.hpp"
#include "seqbandit/types.hpp"

namespace seqbandit {

enum class RewardKind {
    position_match, // fraction of positions equal to the reference
    exact_match,    // 1 iff the whole sequence equals the reference
    table,          // explicit (input, sequence) -> reward map, absent = 0
};

struct TaskSpec {
    Vocabulary vocab;
    int max_len = 0;
    std::vector<InputContext> inputs;
    std::vector<double> input_weights;            // sampling weights, sum to 1
    std::map<int, Sequence> references;           // input id -> reference output
    RewardKind reward_kind = RewardKind::position_match;
    std::map<int, std::map<Sequence, double>> table_rewards;

    void validate() const; // throws ConfigError naming the offending field
};

// |Y| = 3, M = 2, one input, reference (0, 1), position-match rewards.
// Over the 9 sequences the reward multiset is {1.0 x1, 0.5 x4, 0.0 x4},
// so a uniform policy has expected reward exactly 1/3.
TaskSpec desk_task();

double true_reward(const TaskSpec& task, const InputContext& x, const Sequence& y);

// Number of outputs as an order of magnitude: max_len * log10(vocab_size).
double output_space_size(int vocab_size, int max_len);

// Nearest of {0, 0.25, 0.5, 0.75, 1}; exact midpoints round up.
double likert_quantize(double r);

enum class ChannelKind { exact, likert5, gaussian_noise, rater_pool };

struct Rater {
    std::string id;
    double bias = 0.0;
    double noise_sigma = 0.0;
    double consistency = 1.0; // probability of repeating a previous rating identically
};

struct FeedbackChannel {
    ChannelKind kind = ChannelKind::exact;
    double noise_sigma = 0.0; // gaussian_noise and likert5 channels
    std::vector<Rater> raters;
};

struct LoggedInteraction {
    InputContext input;
    Sequence output;
    double delta = 0.0; // observed reward in [0,1]
    double mu = 1.0;    // logging propensity in (0,1]; exactly 1 under deterministic logging
    std::optional<std::string> rater;
};

enum class LoggingMode { deterministic, stochastic };

struct InteractionLog {
    std::vector<LoggedInteraction> records;
    LoggingMode mode = LoggingMode::deterministic;
    std::uint64_t seed = 0;
};

struct LogGenOptions {
    // every drawn item is emitted this many times in a row (same rater), so
    // intra-rater repeats exist for the reliability filters
    int duplicates = 1;
};

// T counts base draws; the record count is T * duplicates. Input/output
// draws and feedback noise use two independent seed-derived streams, so
// swapping the channel changes only delta, never the logged (x, y, mu).
InteractionLog generate_log(const TaskSpec& task, const SequencePolicy& logging_policy,
                            const FeedbackChannel& channel, int T, LoggingMode mode,
                            std::uint64_t seed, const LogGenOptions& options = {});

struct RaterFilterReport {
    std::map<std::string, double> agreement;  // per-rater re-rating agreement
    std::vector<std::string> removed;
    std::vector<std::string> unmeasured;      // kept but had no repeated items
};

// Drops every record of raters whose re-rating agreement (fraction of
// repeated (input, output) items rated identically after Likert
// quantization) falls below min_consistency. Raters without repeats are
// kept and flagged. Record order is preserved.
InteractionLog filter_raters(const InteractionLog& log, double min_consistency,
                             RaterFilterReport* report = nullptr);

// Removes all records of (input, output) groups whose reward standard
// deviation (population) exceeds max_stddev; singleton groups are kept.
InteractionLog filter_high_variance_outputs(const InteractionLog& log, double max_stddev);

// rows = raters, columns = items, nullopt = missing rating.
using RatingTable = std::vector<std::vector<std::optional<double>>>;

// Krippendorff's alpha under the interval metric: 1 - Do/De computed from
// the value coincidence matrix. Defined as 1 when expected disagreement is
// zero (all ratings globally identical).
double krippendorff_alpha(const RatingTable& ratings);

} // namespace seqbandit
