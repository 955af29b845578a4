// python surface for the learning engine: policy arithmetic, log synthesis,
// the off-policy losses, and the trainer
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "seqbandit/checkpoint.hpp"
#include "seqbandit/config.hpp"
#include "seqbandit/objectives.hpp"
#include "seqbandit/reward_model.hpp"
#include "seqbandit/rng.hpp"
#include "seqbandit/trainer.hpp"

namespace py = pybind11;
using namespace seqbandit;

namespace {

InputContext input_of(const TaskSpec& task, int x_id) {
    for (const auto& input : task.inputs)
        if (input.id == x_id) return input;
    return InputContext{x_id, {}};
}

ObjectiveKind objective_from_name(const std::string& name) {
    if (name == "mle") return ObjectiveKind::mle;
    if (name == "ips") return ObjectiveKind::ips;
    if (name == "dpm") return ObjectiveKind::dpm;
    if (name == "osl") return ObjectiveKind::osl;
    if (name == "dpm-baseline") return ObjectiveKind::dpm_baseline;
    if (name == "ips-baseline") return ObjectiveKind::ips_baseline;
    if (name == "dr") return ObjectiveKind::dr;
    throw ConfigError("objective: unknown name '" + name + "'");
}

LoggingMode mode_from_name(const std::string& name) {
    if (name == "stochastic") return LoggingMode::stochastic;
    if (name == "deterministic") return LoggingMode::deterministic;
    throw ConfigError("mode: unknown name '" + name + "'");
}

py::dict weights_to_dict(const Weights& weights) {
    py::dict out;
    for (const auto& [key, value] : weights) out[py::int_(key)] = value;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "counterfactual training of sequence policies from logged feedback";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<EnumerationLimitError>(m, "EnumerationLimitError",
                                                  PyExc_OverflowError);

    py::class_<TaskSpec>(m, "TaskSpec")
        .def_property_readonly("vocab_size",
                               [](const TaskSpec& t) { return t.vocab.size; })
        .def_readonly("max_len", &TaskSpec::max_len)
        .def_property_readonly("input_ids",
                               [](const TaskSpec& t) {
                                   std::vector<int> ids;
                                   for (const auto& input : t.inputs) ids.push_back(input.id);
                                   return ids;
                               })
        .def("true_reward", [](const TaskSpec& t, int x_id, const Sequence& y) {
            return true_reward(t, input_of(t, x_id), y);
        });
    m.def("desk_task", &desk_task);

    py::class_<SequencePolicy>(m, "SequencePolicy")
        .def(py::init([](int vocab_size, int max_len, const std::string& feature_map) {
                 return SequencePolicy(Vocabulary{vocab_size}, max_len,
                                       make_feature_map(feature_map, vocab_size, max_len));
             }),
             py::arg("vocab_size"), py::arg("max_len"),
             py::arg("feature_map") = "tabular")
        .def_property_readonly("vocab_size", &SequencePolicy::vocab_size)
        .def_property_readonly("max_len", &SequencePolicy::max_len)
        .def("get_weights", [](const SequencePolicy& p) { return weights_to_dict(p.weights()); })
        .def("set_weight",
             [](SequencePolicy& p, std::size_t key, double value) { p.weights()[key] = value; })
        .def("token_distribution",
             [](const SequencePolicy& p, int x_id, int position, int prev_token) {
                 StepContext ctx{InputContext{x_id, {}}, position, prev_token};
                 return token_distribution(p, ctx);
             },
             py::arg("x_id"), py::arg("position"), py::arg("prev_token") = -1)
        .def("sequence_probability",
             [](const SequencePolicy& p, int x_id, const Sequence& y) {
                 return sequence_probability(p, InputContext{x_id, {}}, y);
             })
        .def("sequence_log_probability",
             [](const SequencePolicy& p, int x_id, const Sequence& y) {
                 return sequence_log_probability(p, InputContext{x_id, {}}, y);
             })
        .def("greedy_decode",
             [](const SequencePolicy& p, int x_id) {
                 return greedy_decode(p, InputContext{x_id, {}});
             })
        .def("sample",
             [](const SequencePolicy& p, int x_id, std::uint64_t seed) {
                 Rng rng(seed);
                 return sample_sequence(p, InputContext{x_id, {}}, rng);
             },
             py::arg("x_id"), py::arg("seed") = 0);

    py::class_<Rater>(m, "Rater")
        .def(py::init([](std::string id, double bias, double noise_sigma, double consistency) {
                 return Rater{std::move(id), bias, noise_sigma, consistency};
             }),
             py::arg("id"), py::arg("bias") = 0.0, py::arg("noise_sigma") = 0.0,
             py::arg("consistency") = 1.0);

    py::class_<FeedbackChannel>(m, "FeedbackChannel")
        .def(py::init([](const std::string& kind, double noise_sigma,
                         std::vector<Rater> raters) {
                 FeedbackChannel channel;
                 if (kind == "exact") channel.kind = ChannelKind::exact;
                 else if (kind == "likert5") channel.kind = ChannelKind::likert5;
                 else if (kind == "gaussian-noise") channel.kind = ChannelKind::gaussian_noise;
                 else if (kind == "rater-pool") channel.kind = ChannelKind::rater_pool;
                 else throw ConfigError("channel.kind: unknown name '" + kind + "'");
                 channel.noise_sigma = noise_sigma;
                 channel.raters = std::move(raters);
                 return channel;
             }),
             py::arg("kind") = "exact", py::arg("noise_sigma") = 0.0,
             py::arg("raters") = std::vector<Rater>{});

    py::class_<LoggedInteraction>(m, "LoggedInteraction")
        .def_property_readonly("x_id",
                               [](const LoggedInteraction& r) { return r.input.id; })
        .def_readonly("y", &LoggedInteraction::output)
        .def_readonly("delta", &LoggedInteraction::delta)
        .def_readonly("mu", &LoggedInteraction::mu)
        .def_readonly("rater", &LoggedInteraction::rater);

    py::class_<InteractionLog>(m, "InteractionLog")
        .def_readonly("records", &InteractionLog::records)
        .def("__len__", [](const InteractionLog& log) { return log.records.size(); });

    m.def("generate_log",
          [](const TaskSpec& task, const SequencePolicy& logger, const FeedbackChannel& channel,
             int t_count, const std::string& mode, std::uint64_t seed, int duplicates) {
              LogGenOptions options;
              options.duplicates = duplicates;
              return generate_log(task, logger, channel, t_count, mode_from_name(mode), seed,
                                  options);
          },
          py::arg("task"), py::arg("logger"), py::arg("channel"), py::arg("t_count"),
          py::arg("mode") = "stochastic", py::arg("seed") = 0, py::arg("duplicates") = 1);

    m.def("objective_loss",
          [](const std::string& name, const SequencePolicy& policy, const InteractionLog& log) {
              ObjectiveKind kind = objective_from_name(name);
              LossReport report;
              switch (kind) {
                  case ObjectiveKind::ips: report = ips_loss(policy, log); break;
                  case ObjectiveKind::dpm: report = dpm_loss(policy, log); break;
                  case ObjectiveKind::dpm_baseline: report = dpm_baseline_loss(policy, log); break;
                  case ObjectiveKind::ips_baseline: report = ips_baseline_loss(policy, log); break;
                  case ObjectiveKind::osl: report = osl_loss(policy, log, log, policy); break;
                  default:
                      throw ConfigError("objective: '" + name +
                                        "' is not exposed through objective_loss");
              }
              return py::make_tuple(report.loss, weights_to_dict(report.gradient));
          },
          py::arg("name"), py::arg("policy"), py::arg("log"));

    m.def("value_brute_force", &value_brute_force);
    m.def("value_monte_carlo",
          [](const SequencePolicy& policy, const TaskSpec& task, int samples,
             std::uint64_t seed) {
              MonteCarloValue mc = value_monte_carlo(policy, task, samples, seed);
              return py::make_tuple(mc.value, mc.std_error, mc.samples);
          },
          py::arg("policy"), py::arg("task"), py::arg("samples") = 10000, py::arg("seed") = 0);
    m.def("value_self_normalized", &value_self_normalized);
    m.def("baseline_center", &baseline_center);

    m.def("likert_quantize", &likert_quantize);
    m.def("output_space_size", &output_space_size);
    m.def("krippendorff_alpha", &krippendorff_alpha);
    m.def("derive_seed", &derive_seed);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init([](const std::string& objective, double lr, int epochs, int batch_size,
                         std::uint64_t seed, int eval_every) {
                 TrainConfig config;
                 config.objective = objective_from_name(objective);
                 config.lr = lr;
                 config.epochs = epochs;
                 config.batch_size = batch_size;
                 config.seed = seed;
                 config.eval_every = eval_every;
                 return config;
             }),
             py::arg("objective") = "ips", py::arg("lr") = 0.1, py::arg("epochs") = 100,
             py::arg("batch_size") = 0, py::arg("seed") = 0, py::arg("eval_every") = 10);

    py::class_<TraceRow>(m, "TraceRow")
        .def_readonly("step", &TraceRow::step)
        .def_readonly("loss", &TraceRow::loss)
        .def_readonly("oracle_value", &TraceRow::oracle_value)
        .def_readonly("snips_value", &TraceRow::snips_value)
        .def_readonly("logged_mass", &TraceRow::logged_mass);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("policy", &TrainResult::policy)
        .def_property_readonly("trace",
                               [](const TrainResult& r) { return r.trace.rows; });

    m.def("train",
          [](const SequencePolicy& init, const InteractionLog& log, const TaskSpec& task,
             const TrainConfig& config) { return train(init, log, task, config); },
          py::arg("init"), py::arg("log"), py::arg("task"), py::arg("config"));

    m.def("save_policy", &save_policy);
    m.def("load_policy", &load_policy);
    m.def("write_log_jsonl", &write_log_jsonl);
    m.def("read_log_jsonl", &read_log_jsonl);
}
