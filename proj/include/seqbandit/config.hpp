#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqbandit/simkit.hpp"
#include "seqbandit/trainer.hpp"

namespace seqbandit {

enum class LoggingPolicySource { uniform, pretrained, checkpoint };

struct TrainingArm {
    std::string name;
    TrainConfig config;
};

struct ExperimentConfig {
    TaskSpec task;
    LoggingPolicySource logging_policy = LoggingPolicySource::uniform;
    std::string logging_checkpoint; // when source == checkpoint
    FeedbackChannel channel;
    int log_T = 100;
    LoggingMode log_mode = LoggingMode::stochastic;
    int log_duplicates = 1;
    std::string log_path = "log.jsonl";
    std::uint64_t log_seed = 0;
    double init_sigma = 0.0; // stddev of the per-seed gaussian weight jitter at train start
    std::vector<TrainingArm> arms;
    std::vector<std::uint64_t> seeds;
    std::string out_dir = "runs";

    void validate() const; // throws ConfigError naming the offending field
};

// JSON (de)serialization. Parsing validates; serialize(parse(x)) parses back
// to an equal configuration.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string serialize_experiment_config(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

// Builds the logging policy an ExperimentConfig asks for; "pretrained" runs
// a fixed supervised fit on the task references.
SequencePolicy make_logging_policy(const ExperimentConfig& config);

} // namespace seqbandit
