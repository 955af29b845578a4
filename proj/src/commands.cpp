#include "seqbandit/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "seqbandit/checkpoint.hpp"
#include "seqbandit/config.hpp"
#include "seqbandit/objectives.hpp"
#include "seqbandit/rng.hpp"
#include "seqbandit/trainer.hpp"

namespace seqbandit {

namespace {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const DataError*>(&e)) return 3;
    if (dynamic_cast<const std::domain_error*>(&e)) return 3;
    if (dynamic_cast<const std::out_of_range*>(&e)) return 3;
    if (dynamic_cast<const NumericError*>(&e)) return 4;
    return 1;
}

template <typename Body>
int run_command(const Body& body) {
    try {
        body();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

ExperimentConfig load_config(const CliOptions& options) {
    if (options.config_path.empty()) throw ConfigError("--config: missing path");
    ExperimentConfig config = load_experiment_config(options.config_path);
    if (!options.out_dir.empty()) config.out_dir = options.out_dir;
    if (options.seed) config.seeds = {*options.seed};
    return config;
}

std::string log_file_path(const ExperimentConfig& config) {
    fs::path p(config.log_path);
    if (p.is_absolute()) return p.string();
    return (fs::path(config.out_dir) / p).string();
}

SequencePolicy initial_policy(const ExperimentConfig& config, std::uint64_t seed) {
    SequencePolicy policy(Vocabulary{config.task.vocab.size}, config.task.max_len);
    if (config.init_sigma > 0.0) {
        // jitter every tabular feature reachable from the configured inputs
        Rng rng(derive_seed(seed, 7));
        std::vector<std::size_t> feats;
        for (const auto& input : config.task.inputs)
            for (int pos = 0; pos < config.task.max_len; ++pos)
                for (int prev = -1; prev < config.task.vocab.size; ++prev)
                    for (int tok = 0; tok < config.task.vocab.size; ++tok) {
                        StepContext ctx{input, pos, prev};
                        feats.clear();
                        policy.features().step_features(ctx, tok, feats);
                        for (std::size_t f : feats)
                            policy.weights()[f] = rng.normal(config.init_sigma);
                    }
    }
    return policy;
}

struct RunSummary {
    std::string arm;
    std::uint64_t seed;
    double final_oracle = 0.0;
    double final_snips = 0.0;
};

std::vector<RunSummary> train_all_arms(const ExperimentConfig& config,
                                       const InteractionLog& log, bool quiet) {
    // dr arms need a reward model; fit one on the log up front and share it
    bool wants_dr = false;
    for (const auto& arm : config.arms)
        wants_dr = wants_dr || arm.config.objective == ObjectiveKind::dr;
    RewardEstimator estimator;
    if (wants_dr) {
        std::vector<RewardExample> examples;
        for (const auto& rec : log.records)
            examples.push_back({rec.input, rec.output, rec.delta});
        FitOptions fit;
        fit.epochs = 500;
        fit.lr = 0.25;
        estimator = fit_reward_estimator(examples, config.task.vocab.size,
                                         config.task.max_len, fit)
                        .estimator;
    }

    std::vector<RunSummary> summaries;
    for (const auto& arm : config.arms) {
        for (std::uint64_t seed : config.seeds) {
            TrainConfig train_config = arm.config;
            train_config.seed = seed;
            SequencePolicy init = initial_policy(config, seed);
            const RewardEstimator* est =
                arm.config.objective == ObjectiveKind::dr ? &estimator : nullptr;
            TrainResult result = train(init, log, config.task, train_config, est);

            std::string tag = arm.name + "_seed" + std::to_string(seed);
            fs::path out(config.out_dir);
            atomic_write_text((out / ("trace_" + tag + ".csv")).string(),
                              trace_to_csv(result.trace));
            save_policy(result.policy, (out / ("policy_" + tag + ".ckpt")).string());

            RunSummary summary;
            summary.arm = arm.name;
            summary.seed = seed;
            summary.final_oracle = result.trace.rows.empty()
                                       ? value_brute_force(result.policy, config.task)
                                       : result.trace.rows.back().oracle_value;
            summary.final_snips =
                result.trace.rows.empty() ? 0.0 : result.trace.rows.back().snips_value;
            summaries.push_back(summary);
            if (!quiet)
                std::cout << "trained " << tag << ": oracle V = "
                          << format_double(summary.final_oracle) << "\n";
        }
    }
    std::ostringstream csv;
    csv << "arm,seed,final_oracle_value,final_snips_value\n";
    for (const auto& s : summaries)
        csv << s.arm << "," << s.seed << "," << format_double(s.final_oracle) << ","
            << format_double(s.final_snips) << "\n";
    atomic_write_text((fs::path(config.out_dir) / "summary.csv").string(), csv.str());
    return summaries;
}

} // namespace

int cmd_simulate_log(const CliOptions& options) {
    return run_command([&] {
        ExperimentConfig config = load_config(options);
        std::uint64_t seed = options.seed ? *options.seed : config.log_seed;
        SequencePolicy logger = make_logging_policy(config);
        LogGenOptions gen;
        gen.duplicates = config.log_duplicates;
        InteractionLog log = generate_log(config.task, logger, config.channel, config.log_T,
                                          config.log_mode, seed, gen);
        std::string path = log_file_path(config);
        write_log_jsonl(log, path);
        double mean_reward = 0.0;
        for (const auto& rec : log.records) mean_reward += rec.delta;
        mean_reward /= static_cast<double>(log.records.size());
        if (!options.quiet)
            std::cout << "wrote " << log.records.size() << " records to " << path
                      << "; mean reward = " << format_double(mean_reward) << "\n";
    });
}

int cmd_train(const CliOptions& options) {
    return run_command([&] {
        ExperimentConfig config = load_config(options);
        std::string path = log_file_path(config);
        if (!fs::exists(path)) throw DataError("log file '" + path + "' does not exist");
        InteractionLog log = read_log_jsonl(path);
        train_all_arms(config, log, options.quiet);
        if (!options.quiet)
            std::cout << "summary written to "
                      << (fs::path(config.out_dir) / "summary.csv").string() << "\n";
    });
}

int cmd_evaluate(const CliOptions& options) {
    return run_command([&] {
        ExperimentConfig config = load_config(options);
        if (options.checkpoint_path.empty())
            throw ConfigError("--checkpoint: missing path");
        SequencePolicy policy = load_policy(options.checkpoint_path);
        std::ostream& out = std::cout;
        try {
            double v = value_brute_force(policy, config.task);
            if (!options.quiet) out << "oracle V = " << format_double(v) << "\n";
        } catch (const EnumerationLimitError&) {
            std::uint64_t seed = options.seed ? *options.seed : config.log_seed;
            MonteCarloValue mc = value_monte_carlo(policy, config.task, 10000, seed);
            if (!options.quiet)
                out << "monte carlo V = " << format_double(mc.value) << " +/- "
                    << format_double(mc.std_error) << " (" << mc.samples << " samples)\n";
        }
        if (options.quiet) return;
        for (const auto& input : config.task.inputs) {
            Sequence decoded = greedy_decode(policy, input);
            out << "input " << input.id << ": greedy =";
            for (int tok : decoded) out << " " << tok;
            auto ref = config.task.references.find(input.id);
            if (ref != config.task.references.end())
                out << ", pi(reference) = "
                    << format_double(sequence_probability(policy, input, ref->second));
            out << "\n";
        }
    });
}

int cmd_grad_check(const CliOptions& options) {
    return run_command([&] {
        ExperimentConfig config = load_config(options);
        std::uint64_t seed = options.seed ? *options.seed : config.log_seed;
        SequencePolicy logger = make_logging_policy(config);
        LogGenOptions gen;
        gen.duplicates = config.log_duplicates;
        InteractionLog log = generate_log(config.task, logger, config.channel, config.log_T,
                                          config.log_mode, seed, gen);
        // probe at a jittered point: gradients at the uniform policy can be
        // symmetric enough to hide indexing mistakes
        ExperimentConfig jittered = config;
        jittered.init_sigma = jittered.init_sigma > 0.0 ? jittered.init_sigma : 0.5;
        bool all_passed = true;
        for (const auto& arm : config.arms) {
            SequencePolicy policy = initial_policy(jittered, derive_seed(seed, 11));
            RewardEstimator estimator;
            estimator.vocab_size = config.task.vocab.size;
            estimator.max_len = config.task.max_len;
            const RewardEstimator* est =
                arm.config.objective == ObjectiveKind::dr ? &estimator : nullptr;
            GradCheckReport report =
                gradient_check(arm.config.objective, policy, log, 1e-5, 1e-5, est);
            all_passed = all_passed && report.passed;
            if (!options.quiet)
                std::cout << arm.name << ": max relative error = "
                          << format_double(report.max_rel_error) << " over "
                          << report.features_checked << " features -> "
                          << (report.passed ? "ok" : "FAILED") << "\n";
        }
        if (!all_passed) throw NumericError("gradient check failed");
    });
}

int cmd_sweep(const CliOptions& options) {
    return run_command([&] {
        ExperimentConfig config = load_config(options);
        SequencePolicy logger = make_logging_policy(config);
        // end to end: generate one log per seed, train every arm on it
        std::map<std::string, std::vector<double>> oracle_by_arm;
        for (std::uint64_t seed : config.seeds) {
            LogGenOptions gen;
            gen.duplicates = config.log_duplicates;
            InteractionLog log =
                generate_log(config.task, logger, config.channel, config.log_T,
                             config.log_mode, derive_seed(config.log_seed, seed), gen);
            ExperimentConfig one = config;
            one.seeds = {seed};
            // per-run-unique artifact paths: don't clobber cmd_train's output
            one.out_dir = (fs::path(config.out_dir) / ("sweep_seed" + std::to_string(seed)))
                              .string();
            std::vector<RunSummary> summaries = train_all_arms(one, log, true);
            for (const auto& s : summaries) oracle_by_arm[s.arm].push_back(s.final_oracle);
        }
        std::ostringstream csv;
        csv << "arm,runs,mean_oracle_value,stddev_oracle_value\n";
        for (const auto& [arm, values] : oracle_by_arm) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(values.size());
            csv << arm << "," << values.size() << "," << format_double(mean) << ","
                << format_double(std::sqrt(var)) << "\n";
            if (!options.quiet)
                std::cout << arm << ": mean oracle V = " << format_double(mean) << " over "
                          << values.size() << " seeds\n";
        }
        atomic_write_text((fs::path(config.out_dir) / "sweep.csv").string(), csv.str());
    });
}

} // namespace seqbandit
