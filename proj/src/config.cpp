#include "seqbandit/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqbandit/checkpoint.hpp"

namespace seqbandit {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
}

std::string reward_kind_name(RewardKind kind) {
    switch (kind) {
        case RewardKind::position_match: return "position-match";
        case RewardKind::exact_match: return "exact-match";
        case RewardKind::table: return "table";
    }
    return "position-match";
}

RewardKind parse_reward_kind(const std::string& name) {
    if (name == "position-match") return RewardKind::position_match;
    if (name == "exact-match") return RewardKind::exact_match;
    if (name == "table") return RewardKind::table;
    bad_field("task.reward_kind", "unknown value '" + name + "'");
}

std::string channel_kind_name(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::exact: return "exact";
        case ChannelKind::likert5: return "likert5";
        case ChannelKind::gaussian_noise: return "gaussian-noise";
        case ChannelKind::rater_pool: return "rater-pool";
    }
    return "exact";
}

ChannelKind parse_channel_kind(const std::string& name) {
    if (name == "exact") return ChannelKind::exact;
    if (name == "likert5") return ChannelKind::likert5;
    if (name == "gaussian-noise") return ChannelKind::gaussian_noise;
    if (name == "rater-pool") return ChannelKind::rater_pool;
    bad_field("channel.kind", "unknown value '" + name + "'");
}

std::string objective_name(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::mle: return "mle";
        case ObjectiveKind::ips: return "ips";
        case ObjectiveKind::dpm: return "dpm";
        case ObjectiveKind::osl: return "osl";
        case ObjectiveKind::dpm_baseline: return "dpm-baseline";
        case ObjectiveKind::ips_baseline: return "ips-baseline";
        case ObjectiveKind::dr: return "dr";
    }
    return "dpm";
}

ObjectiveKind parse_objective(const std::string& name, const std::string& field) {
    if (name == "mle") return ObjectiveKind::mle;
    if (name == "ips") return ObjectiveKind::ips;
    if (name == "dpm") return ObjectiveKind::dpm;
    if (name == "osl") return ObjectiveKind::osl;
    if (name == "dpm-baseline") return ObjectiveKind::dpm_baseline;
    if (name == "ips-baseline") return ObjectiveKind::ips_baseline;
    if (name == "dr") return ObjectiveKind::dr;
    bad_field(field, "unknown objective '" + name + "'");
}

template <typename T>
T get_field(const json& j, const std::string& field, const std::string& path, T fallback) {
    if (!j.contains(field)) return fallback;
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        bad_field(path + "." + field, "wrong type");
    }
}

template <typename T>
T require_field(const json& j, const std::string& field, const std::string& path) {
    if (!j.contains(field)) bad_field(path + "." + field, "missing");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception&) {
        bad_field(path + "." + field, "wrong type");
    }
}

TaskSpec parse_task(const json& j) {
    TaskSpec task;
    task.vocab.size = require_field<int>(j, "vocab_size", "task");
    task.max_len = require_field<int>(j, "max_len", "task");
    if (!j.contains("inputs")) bad_field("task.inputs", "missing");
    for (const auto& input : j.at("inputs")) {
        InputContext ctx;
        ctx.id = require_field<int>(input, "id", "task.inputs");
        task.inputs.push_back(ctx);
        task.input_weights.push_back(get_field<double>(input, "weight", "task.inputs", 1.0));
    }
    if (j.contains("references"))
        for (const auto& [key, value] : j.at("references").items()) {
            try {
                task.references[std::stoi(key)] = value.get<Sequence>();
            } catch (const json::exception&) {
                bad_field("task.references", "wrong type for input " + key);
            }
        }
    task.reward_kind =
        parse_reward_kind(get_field<std::string>(j, "reward_kind", "task", "position-match"));
    if (j.contains("table_rewards"))
        for (const auto& [key, entries] : j.at("table_rewards").items())
            for (const auto& entry : entries) {
                Sequence y = require_field<Sequence>(entry, "y", "task.table_rewards");
                double delta = require_field<double>(entry, "delta", "task.table_rewards");
                task.table_rewards[std::stoi(key)][y] = delta;
            }
    return task;
}

json task_to_json(const TaskSpec& task) {
    json j;
    j["vocab_size"] = task.vocab.size;
    j["max_len"] = task.max_len;
    j["inputs"] = json::array();
    for (std::size_t i = 0; i < task.inputs.size(); ++i)
        j["inputs"].push_back({{"id", task.inputs[i].id}, {"weight", task.input_weights[i]}});
    j["references"] = json::object();
    for (const auto& [id, y] : task.references) j["references"][std::to_string(id)] = y;
    j["reward_kind"] = reward_kind_name(task.reward_kind);
    j["table_rewards"] = json::object();
    for (const auto& [id, rewards] : task.table_rewards) {
        json entries = json::array();
        for (const auto& [y, delta] : rewards) entries.push_back({{"y", y}, {"delta", delta}});
        j["table_rewards"][std::to_string(id)] = entries;
    }
    return j;
}

FeedbackChannel parse_channel(const json& j) {
    FeedbackChannel channel;
    channel.kind = parse_channel_kind(get_field<std::string>(j, "kind", "channel", "exact"));
    channel.noise_sigma = get_field<double>(j, "noise_sigma", "channel", 0.0);
    if (channel.noise_sigma < 0.0) bad_field("channel.noise_sigma", "must be non-negative");
    if (j.contains("raters"))
        for (const auto& r : j.at("raters")) {
            Rater rater;
            rater.id = require_field<std::string>(r, "id", "channel.raters");
            rater.bias = get_field<double>(r, "bias", "channel.raters", 0.0);
            rater.noise_sigma = get_field<double>(r, "noise_sigma", "channel.raters", 0.0);
            rater.consistency = get_field<double>(r, "consistency", "channel.raters", 1.0);
            if (rater.consistency < 0.0 || rater.consistency > 1.0)
                bad_field("channel.raters.consistency", "must be in [0,1]");
            if (rater.noise_sigma < 0.0)
                bad_field("channel.raters.noise_sigma", "must be non-negative");
            channel.raters.push_back(std::move(rater));
        }
    return channel;
}

json channel_to_json(const FeedbackChannel& channel) {
    json j;
    j["kind"] = channel_kind_name(channel.kind);
    j["noise_sigma"] = channel.noise_sigma;
    j["raters"] = json::array();
    for (const auto& r : channel.raters)
        j["raters"].push_back({{"id", r.id},
                               {"bias", r.bias},
                               {"noise_sigma", r.noise_sigma},
                               {"consistency", r.consistency}});
    return j;
}

TrainConfig parse_train_config(const json& j, const std::string& path) {
    TrainConfig cfg;
    cfg.objective = parse_objective(require_field<std::string>(j, "objective", path),
                                    path + ".objective");
    cfg.lr = get_field<double>(j, "lr", path, cfg.lr);
    std::string optimizer = get_field<std::string>(j, "optimizer", path, "sgd");
    if (optimizer == "sgd")
        cfg.optimizer = OptimizerKind::sgd;
    else if (optimizer == "adam")
        cfg.optimizer = OptimizerKind::adam;
    else
        bad_field(path + ".optimizer", "unknown value '" + optimizer + "'");
    cfg.adam_beta1 = get_field<double>(j, "adam_beta1", path, cfg.adam_beta1);
    cfg.adam_beta2 = get_field<double>(j, "adam_beta2", path, cfg.adam_beta2);
    cfg.adam_eps = get_field<double>(j, "adam_eps", path, cfg.adam_eps);
    cfg.epochs = get_field<int>(j, "epochs", path, cfg.epochs);
    cfg.batch_size = get_field<int>(j, "batch_size", path, cfg.batch_size);
    std::string stop = get_field<std::string>(j, "early_stop", path, "none");
    if (stop == "none")
        cfg.early_stop = EarlyStopKind::none;
    else if (stop == "on-metric")
        cfg.early_stop = EarlyStopKind::on_metric;
    else
        bad_field(path + ".early_stop", "unknown value '" + stop + "'");
    cfg.patience = get_field<int>(j, "patience", path, cfg.patience);
    std::string metric = get_field<std::string>(j, "metric", path, "snips-value");
    if (metric == "snips-value")
        cfg.metric = StopMetric::snips_value;
    else if (metric == "oracle-value")
        cfg.metric = StopMetric::oracle_value;
    else
        bad_field(path + ".metric", "unknown value '" + metric + "'");
    cfg.eval_every = get_field<int>(j, "eval_every", path, cfg.eval_every);
    cfg.osl_refresh_every = get_field<int>(j, "osl_refresh_every", path, cfg.osl_refresh_every);
    cfg.dr.enumeration_limit =
        get_field<double>(j, "dr_enumeration_limit", path, cfg.dr.enumeration_limit);
    cfg.dr.sample_count = get_field<int>(j, "dr_sample_count", path, cfg.dr.sample_count);
    cfg.validate();
    return cfg;
}

json train_config_to_json(const TrainingArm& arm) {
    const TrainConfig& cfg = arm.config;
    json j;
    j["name"] = arm.name;
    j["objective"] = objective_name(cfg.objective);
    j["lr"] = cfg.lr;
    j["optimizer"] = cfg.optimizer == OptimizerKind::adam ? "adam" : "sgd";
    j["adam_beta1"] = cfg.adam_beta1;
    j["adam_beta2"] = cfg.adam_beta2;
    j["adam_eps"] = cfg.adam_eps;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["early_stop"] = cfg.early_stop == EarlyStopKind::on_metric ? "on-metric" : "none";
    j["patience"] = cfg.patience;
    j["metric"] = cfg.metric == StopMetric::oracle_value ? "oracle-value" : "snips-value";
    j["eval_every"] = cfg.eval_every;
    j["osl_refresh_every"] = cfg.osl_refresh_every;
    j["dr_enumeration_limit"] = cfg.dr.enumeration_limit;
    j["dr_sample_count"] = cfg.dr.sample_count;
    return j;
}

} // namespace

void ExperimentConfig::validate() const {
    task.validate();
    if (logging_policy == LoggingPolicySource::checkpoint && logging_checkpoint.empty())
        bad_field("logging_policy.checkpoint", "missing path");
    if (log_T < 1) bad_field("log.T", "must be at least 1");
    if (log_duplicates < 1) bad_field("log.duplicates", "must be at least 1");
    if (log_path.empty()) bad_field("log.path", "must be non-empty");
    if (init_sigma < 0.0) bad_field("init_sigma", "must be non-negative");
    if (arms.empty()) bad_field("arms", "must be non-empty");
    for (const auto& arm : arms) {
        if (arm.name.empty()) bad_field("arms.name", "must be non-empty");
        arm.config.validate();
    }
    if (seeds.empty()) bad_field("seeds", "must be non-empty");
    if (out_dir.empty()) bad_field("out_dir", "must be non-empty");
}

namespace {

ExperimentConfig parse_experiment_json(const json& j) {
    ExperimentConfig config;
    if (!j.contains("task")) bad_field("task", "missing");
    config.task = parse_task(j.at("task"));

    if (j.contains("logging_policy")) {
        const json& lp = j.at("logging_policy");
        if (lp.is_string()) {
            std::string name = lp.get<std::string>();
            if (name == "uniform")
                config.logging_policy = LoggingPolicySource::uniform;
            else if (name == "pretrained")
                config.logging_policy = LoggingPolicySource::pretrained;
            else
                bad_field("logging_policy", "unknown value '" + name + "'");
        } else if (lp.is_object() && lp.contains("checkpoint")) {
            config.logging_policy = LoggingPolicySource::checkpoint;
            config.logging_checkpoint = lp.at("checkpoint").get<std::string>();
        } else {
            bad_field("logging_policy", "expected 'uniform', 'pretrained' or {\"checkpoint\": path}");
        }
    }

    if (j.contains("channel")) config.channel = parse_channel(j.at("channel"));
    if (j.contains("log")) {
        const json& lg = j.at("log");
        config.log_T = get_field<int>(lg, "T", "log", config.log_T);
        std::string mode = get_field<std::string>(lg, "mode", "log", "stochastic");
        if (mode == "deterministic")
            config.log_mode = LoggingMode::deterministic;
        else if (mode == "stochastic")
            config.log_mode = LoggingMode::stochastic;
        else
            bad_field("log.mode", "unknown value '" + mode + "'");
        config.log_duplicates = get_field<int>(lg, "duplicates", "log", config.log_duplicates);
        config.log_path = get_field<std::string>(lg, "path", "log", config.log_path);
        config.log_seed = get_field<std::uint64_t>(lg, "seed", "log", config.log_seed);
    }
    config.init_sigma = get_field<double>(j, "init_sigma", "config", config.init_sigma);

    if (!j.contains("arms")) bad_field("arms", "missing");
    for (const auto& arm_json : j.at("arms")) {
        TrainingArm arm;
        arm.name = require_field<std::string>(arm_json, "name", "arms");
        arm.config = parse_train_config(arm_json, "arms[" + arm.name + "]");
        config.arms.push_back(std::move(arm));
    }
    config.seeds = get_field<std::vector<std::uint64_t>>(j, "seeds", "config", {0});
    config.out_dir = get_field<std::string>(j, "out_dir", "config", config.out_dir);
    config.validate();
    return config;
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    try {
        return parse_experiment_json(j);
    } catch (const json::exception& e) {
        // malformed shapes not caught by a named field check
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

std::string serialize_experiment_config(const ExperimentConfig& config) {
    json j;
    j["task"] = task_to_json(config.task);
    switch (config.logging_policy) {
        case LoggingPolicySource::uniform: j["logging_policy"] = "uniform"; break;
        case LoggingPolicySource::pretrained: j["logging_policy"] = "pretrained"; break;
        case LoggingPolicySource::checkpoint:
            j["logging_policy"] = {{"checkpoint", config.logging_checkpoint}};
            break;
    }
    j["channel"] = channel_to_json(config.channel);
    j["log"] = {{"T", config.log_T},
                {"mode", config.log_mode == LoggingMode::deterministic ? "deterministic"
                                                                       : "stochastic"},
                {"duplicates", config.log_duplicates},
                {"path", config.log_path},
                {"seed", config.log_seed}};
    j["init_sigma"] = config.init_sigma;
    j["arms"] = json::array();
    for (const auto& arm : config.arms) j["arms"].push_back(train_config_to_json(arm));
    j["seeds"] = config.seeds;
    j["out_dir"] = config.out_dir;
    return j.dump(2) + "\n";
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    // canonical-form equality: the serializer emits every field explicitly
    return serialize_experiment_config(a) == serialize_experiment_config(b);
}

SequencePolicy make_logging_policy(const ExperimentConfig& config) {
    switch (config.logging_policy) {
        case LoggingPolicySource::uniform:
            return SequencePolicy(Vocabulary{config.task.vocab.size}, config.task.max_len);
        case LoggingPolicySource::checkpoint:
            return load_policy(config.logging_checkpoint);
        case LoggingPolicySource::pretrained: {
            if (config.task.references.empty())
                throw ConfigError(
                    "logging_policy: 'pretrained' needs task.references to fit on");
            InteractionLog supervised;
            supervised.mode = LoggingMode::deterministic;
            for (const auto& [id, y] : config.task.references) {
                LoggedInteraction rec;
                rec.input = InputContext{id, {}};
                rec.output = y;
                rec.delta = 1.0;
                rec.mu = 1.0;
                supervised.records.push_back(std::move(rec));
            }
            TrainConfig mle;
            mle.objective = ObjectiveKind::mle;
            mle.lr = 0.5;
            mle.epochs = 500;
            mle.eval_every = 100;
            SequencePolicy init(Vocabulary{config.task.vocab.size}, config.task.max_len);
            return train(init, supervised, config.task, mle).policy;
        }
    }
    throw ConfigError("logging_policy: unknown source");
}

} // namespace seqbandit
