#include "seqbandit/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "seqbandit/trainer.hpp"

namespace seqbandit {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void atomic_write_text(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path temp = target;
    temp += ".tmp";
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open '" + temp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw DataError("short write to '" + temp.string() + "'");
    }
    fs::rename(temp, target); // atomic on POSIX: readers never see partial files
}

namespace {

std::string serialize_weights(const Weights& weights) {
    std::ostringstream out;
    out << "weights " << weights.size() << "\n";
    for (const auto& [f, w] : weights) out << f << " " << format_double(w) << "\n";
    return out.str();
}

// shared reader for the header "key value" lines of both checkpoint kinds
struct CheckpointReader {
    std::ifstream in;
    std::string path;

    explicit CheckpointReader(const std::string& p) : in(p), path(p) {
        if (!in) throw DataError("cannot open checkpoint '" + p + "'");
    }

    std::string expect(const std::string& key) {
        std::string k, v;
        if (!(in >> k >> v) || k != key)
            throw DataError("checkpoint '" + path + "': expected '" + key + "' line");
        return v;
    }

    Weights read_weights() {
        std::size_t count = std::stoull(expect("weights"));
        Weights weights;
        for (std::size_t i = 0; i < count; ++i) {
            std::size_t f;
            double w;
            if (!(in >> f >> w))
                throw DataError("checkpoint '" + path + "': truncated weight table");
            weights[f] = w;
        }
        return weights;
    }
};

} // namespace

void save_policy(const SequencePolicy& policy, const std::string& path) {
    std::ostringstream out;
    out << "kind policy\n";
    out << "vocab_size " << policy.vocab_size() << "\n";
    out << "max_len " << policy.max_len() << "\n";
    out << "feature_map " << policy.features().descriptor() << "\n";
    out << serialize_weights(policy.weights());
    atomic_write_text(path, out.str());
}

SequencePolicy load_policy(const std::string& path) {
    CheckpointReader reader(path);
    if (reader.expect("kind") != "policy")
        throw DataError("checkpoint '" + path + "': not a policy checkpoint");
    int vocab_size = std::stoi(reader.expect("vocab_size"));
    int max_len = std::stoi(reader.expect("max_len"));
    std::string descriptor = reader.expect("feature_map");
    SequencePolicy policy(Vocabulary{vocab_size}, max_len,
                          make_feature_map(descriptor, vocab_size, max_len));
    policy.weights() = reader.read_weights();
    return policy;
}

void save_reward_estimator(const RewardEstimator& estimator, const std::string& path) {
    std::ostringstream out;
    out << "kind reward_estimator\n";
    out << "vocab_size " << estimator.vocab_size << "\n";
    out << "max_len " << estimator.max_len << "\n";
    out << serialize_weights(estimator.weights);
    atomic_write_text(path, out.str());
}

RewardEstimator load_reward_estimator(const std::string& path) {
    CheckpointReader reader(path);
    if (reader.expect("kind") != "reward_estimator")
        throw DataError("checkpoint '" + path + "': not a reward estimator checkpoint");
    RewardEstimator estimator;
    estimator.vocab_size = std::stoi(reader.expect("vocab_size"));
    estimator.max_len = std::stoi(reader.expect("max_len"));
    estimator.weights = reader.read_weights();
    return estimator;
}

void write_log_jsonl(const InteractionLog& log, const std::string& path) {
    std::ostringstream out;
    for (const auto& rec : log.records) {
        nlohmann::json j;
        j["x"] = rec.input.id;
        j["y"] = rec.output;
        j["delta"] = rec.delta;
        j["mu"] = rec.mu;
        if (rec.rater) j["rater"] = *rec.rater;
        out << j.dump() << "\n"; // keys serialize alphabetically: byte-stable
    }
    atomic_write_text(path, out.str());
}

InteractionLog read_log_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open log file '" + path + "'");
    InteractionLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("log '" + path + "' line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        LoggedInteraction rec;
        try {
            rec.input.id = j.at("x").get<int>();
            rec.output = j.at("y").get<Sequence>();
            rec.delta = j.at("delta").get<double>();
            rec.mu = j.at("mu").get<double>();
            if (j.contains("rater")) rec.rater = j.at("rater").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError("log '" + path + "' line " + std::to_string(line_no) + ": " +
                            e.what());
        }
        log.records.push_back(std::move(rec));
    }
    return log;
}

std::string trace_to_csv(const RunTrace& trace) {
    std::ostringstream out;
    out << "step,loss,oracle_value,snips_value,logged_mass\n";
    for (const auto& row : trace.rows)
        out << row.step << "," << format_double(row.loss) << ","
            << format_double(row.oracle_value) << "," << format_double(row.snips_value) << ","
            << format_double(row.logged_mass) << "\n";
    return out.str();
}

} // namespace seqbandit
