#pragma once

#include <string>

#include "seqbandit/policy.hpp"
#include "seqbandit/reward_model.hpp"
#include "seqbandit/simkit.hpp"

namespace seqbandit {

// %.17g: shortest decimal form that round-trips IEEE doubles exactly.
std::string format_double(double value);

// Writes to a temp file in the destination directory and renames into
// place, so interrupted runs never leave partial artifacts.
void atomic_write_text(const std::string& path, const std::string& content);

// Text checkpoints: header lines (kind, vocab size, length bound, feature
// map descriptor) followed by feature-id/weight pairs at 17 significant
// digits.
void save_policy(const SequencePolicy& policy, const std::string& path);
SequencePolicy load_policy(const std::string& path);

void save_reward_estimator(const RewardEstimator& estimator, const std::string& path);
RewardEstimator load_reward_estimator(const std::string& path);

// JSON-lines interaction logs: {"delta":..,"mu":..,"rater":..,"x":..,"y":[..]}
// per record; value-exact round trip.
void write_log_jsonl(const InteractionLog& log, const std::string& path);
InteractionLog read_log_jsonl(const std::string& path);

// RunTrace CSV with header step,loss,oracle_value,snips_value,logged_mass.
std::string trace_to_csv(const struct RunTrace& trace);

} // namespace seqbandit
