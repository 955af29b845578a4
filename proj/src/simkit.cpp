#include "seqbandit/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "seqbandit/rng.hpp"

namespace seqbandit {

void TaskSpec::validate() const {
    if (vocab.size < 2) throw ConfigError("task.vocab_size: must be at least 2");
    if (max_len < 1) throw ConfigError("task.max_len: must be at least 1");
    if (inputs.empty()) throw ConfigError("task.inputs: must be non-empty");
    if (inputs.size() != input_weights.size())
        throw ConfigError("task.inputs: weight count does not match input count");
    double total = 0.0;
    for (double w : input_weights) {
        if (w < 0.0) throw ConfigError("task.inputs: sampling weights must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ConfigError("task.inputs: sampling weights must sum to 1");
    auto check_sequence = [this](const Sequence& y, const char* field) {
        if (static_cast<int>(y.size()) != max_len)
            throw ConfigError(std::string(field) + ": sequence length must equal max_len");
        for (int tok : y)
            if (tok < 0 || tok >= vocab.size)
                throw ConfigError(std::string(field) + ": token id outside vocabulary");
    };
    if (reward_kind == RewardKind::table) {
        for (const auto& [input_id, rewards] : table_rewards)
            for (const auto& [y, delta] : rewards) {
                check_sequence(y, "task.table_rewards");
                if (delta < 0.0 || delta > 1.0)
                    throw ConfigError("task.table_rewards: reward outside [0,1]");
            }
    } else {
        for (const auto& input : inputs)
            if (!references.count(input.id))
                throw ConfigError("task.references: missing reference for input " +
                                  std::to_string(input.id));
        for (const auto& [input_id, y] : references) check_sequence(y, "task.references");
    }
}

TaskSpec desk_task() {
    TaskSpec task;
    task.vocab = Vocabulary{3};
    task.max_len = 2;
    task.inputs = {InputContext{0, {}}};
    task.input_weights = {1.0};
    task.references[0] = Sequence{0, 1};
    task.reward_kind = RewardKind::position_match;
    return task;
}

double true_reward(const TaskSpec& task, const InputContext& x, const Sequence& y) {
    if (task.reward_kind == RewardKind::table) {
        auto it = task.table_rewards.find(x.id);
        if (it == task.table_rewards.end()) return 0.0;
        auto jt = it->second.find(y);
        return jt == it->second.end() ? 0.0 : jt->second;
    }
    auto it = task.references.find(x.id);
    if (it == task.references.end())
        throw std::domain_error("unknown input id " + std::to_string(x.id));
    const Sequence& ref = it->second;
    if (task.reward_kind == RewardKind::exact_match) return y == ref ? 1.0 : 0.0;
    // position-match: fraction of positions agreeing with the reference
    std::size_t matches = 0;
    std::size_t upto = std::min(y.size(), ref.size());
    for (std::size_t j = 0; j < upto; ++j)
        if (y[j] == ref[j]) ++matches;
    return static_cast<double>(matches) / static_cast<double>(task.max_len);
}

double output_space_size(int vocab_size, int max_len) {
    if (vocab_size < 2) throw std::domain_error("vocab size must be at least 2");
    if (max_len < 1) throw std::domain_error("length bound must be at least 1");
    return static_cast<double>(max_len) * std::log10(static_cast<double>(vocab_size));
}

double likert_quantize(double r) {
    if (!(r >= 0.0 && r <= 1.0))
        throw std::domain_error("likert_quantize: value outside [0,1]");
    // nearest of {0, .25, .5, .75, 1}; floor(4r + 1/2) sends exact midpoints up
    return std::floor(4.0 * r + 0.5) / 4.0;
}

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Applies the feedback channel to one ground-truth reward. Rater state (the
// rating cache keyed by rater and item) lives for one generate_log call.
struct ChannelState {
    const FeedbackChannel& channel;
    Rng& noise_rng;
    std::map<std::tuple<std::size_t, int, Sequence>, double> rating_cache;

    double rate(double truth, std::size_t rater_index, const InputContext& x,
                const Sequence& y) {
        const Rater& rater = channel.raters[rater_index];
        auto key = std::make_tuple(rater_index, x.id, y);
        auto it = rating_cache.find(key);
        if (it != rating_cache.end()) {
            // a consistent rater repeats the cached rating; otherwise the
            // noise is drawn afresh (one uniform consumed either way)
            if (noise_rng.uniform() < rater.consistency) return it->second;
        }
        double rating = likert_quantize(clamp01(truth + rater.bias +
                                                noise_rng.normal(rater.noise_sigma)));
        rating_cache[key] = rating;
        return rating;
    }

    double apply(double truth, std::size_t rater_index, const InputContext& x,
                 const Sequence& y) {
        switch (channel.kind) {
            case ChannelKind::exact:
                return truth;
            case ChannelKind::gaussian_noise:
                return clamp01(truth + noise_rng.normal(channel.noise_sigma));
            case ChannelKind::likert5:
                return likert_quantize(clamp01(truth + noise_rng.normal(channel.noise_sigma)));
            case ChannelKind::rater_pool:
                return rate(truth, rater_index, x, y);
        }
        throw ConfigError("channel.kind: unknown feedback channel");
    }
};

} // namespace

InteractionLog generate_log(const TaskSpec& task, const SequencePolicy& logging_policy,
                            const FeedbackChannel& channel, int T, LoggingMode mode,
                            std::uint64_t seed, const LogGenOptions& options) {
    task.validate();
    if (T < 1) throw ConfigError("log.T: must be at least 1");
    if (options.duplicates < 1) throw ConfigError("log.duplicates: must be at least 1");
    if (channel.kind == ChannelKind::rater_pool && channel.raters.empty())
        throw ConfigError("channel.raters: rater pool is empty");

    // separate streams: swapping the channel must not disturb the draws
    Rng draw_rng(derive_seed(seed, 1));
    Rng noise_rng(derive_seed(seed, 2));
    ChannelState state{channel, noise_rng, {}};

    InteractionLog log;
    log.mode = mode;
    log.seed = seed;
    log.records.reserve(static_cast<std::size_t>(T) * static_cast<std::size_t>(options.duplicates));
    for (int t = 0; t < T; ++t) {
        const InputContext& x = task.inputs[static_cast<std::size_t>(
            draw_rng.categorical(task.input_weights))];
        Sequence y;
        double mu = 1.0;
        if (mode == LoggingMode::deterministic) {
            y = greedy_decode(logging_policy, x);
        } else {
            std::tie(y, mu) = sample_sequence(logging_policy, x, draw_rng);
        }
        double truth = true_reward(task, x, y);
        // all duplicates of an item go to one rater (round-robin) so the
        // reliability filters see genuine intra-rater repeats
        std::size_t rater_index =
            channel.raters.empty() ? 0
                                   : static_cast<std::size_t>(t) % channel.raters.size();
        for (int d = 0; d < options.duplicates; ++d) {
            LoggedInteraction rec;
            rec.input = x;
            rec.output = y;
            rec.mu = mu;
            rec.delta = state.apply(truth, rater_index, x, y);
            if (channel.kind == ChannelKind::rater_pool)
                rec.rater = channel.raters[rater_index].id;
            log.records.push_back(std::move(rec));
        }
    }
    return log;
}

InteractionLog filter_raters(const InteractionLog& log, double min_consistency,
                             RaterFilterReport* report) {
    // group quantized ratings by (rater, input, output)
    std::map<std::string, std::map<std::pair<int, Sequence>, std::vector<double>>> by_rater;
    for (const auto& rec : log.records)
        if (rec.rater)
            by_rater[*rec.rater][{rec.input.id, rec.output}].push_back(
                likert_quantize(clamp01(rec.delta)));

    RaterFilterReport local;
    RaterFilterReport& rep = report ? *report : local;
    rep = RaterFilterReport{};
    std::set<std::string> dropped;
    for (const auto& [rater_id, items] : by_rater) {
        int repeated = 0, agreeing = 0;
        for (const auto& [item, ratings] : items) {
            if (ratings.size() < 2) continue;
            ++repeated;
            bool identical = std::all_of(ratings.begin(), ratings.end(),
                                         [&](double v) { return v == ratings.front(); });
            if (identical) ++agreeing;
        }
        if (repeated == 0) {
            rep.unmeasured.push_back(rater_id); // no repeats: keep, but flag
            continue;
        }
        double agreement = static_cast<double>(agreeing) / static_cast<double>(repeated);
        rep.agreement[rater_id] = agreement;
        if (agreement < min_consistency) {
            dropped.insert(rater_id);
            rep.removed.push_back(rater_id);
        }
    }

    InteractionLog out;
    out.mode = log.mode;
    out.seed = log.seed;
    for (const auto& rec : log.records)
        if (!rec.rater || !dropped.count(*rec.rater)) out.records.push_back(rec);
    return out;
}

InteractionLog filter_high_variance_outputs(const InteractionLog& log, double max_stddev) {
    std::map<std::pair<int, Sequence>, std::vector<double>> groups;
    for (const auto& rec : log.records)
        groups[{rec.input.id, rec.output}].push_back(rec.delta);

    std::set<std::pair<int, Sequence>> dropped;
    for (const auto& [key, deltas] : groups) {
        if (deltas.size() < 2) continue; // singleton groups are kept
        double mean = 0.0;
        for (double d : deltas) mean += d;
        mean /= static_cast<double>(deltas.size());
        double var = 0.0;
        for (double d : deltas) var += (d - mean) * (d - mean);
        var /= static_cast<double>(deltas.size()); // population variance
        if (std::sqrt(var) > max_stddev) dropped.insert(key);
    }

    InteractionLog out;
    out.mode = log.mode;
    out.seed = log.seed;
    for (const auto& rec : log.records)
        if (!dropped.count({rec.input.id, rec.output})) out.records.push_back(rec);
    return out;
}

double krippendorff_alpha(const RatingTable& ratings) {
    if (ratings.empty()) throw DataError("krippendorff_alpha: empty rating table");
    std::size_t items = 0;
    for (const auto& row : ratings) items = std::max(items, row.size());

    // coincidence counts over distinct values: each pairable item with m
    // ratings contributes 1/(m-1) per ordered co-rating pair
    std::map<double, std::size_t> value_index;
    std::vector<std::vector<double>> item_values(items);
    for (const auto& row : ratings)
        for (std::size_t u = 0; u < row.size(); ++u)
            if (row[u]) {
                item_values[u].push_back(*row[u]);
                value_index.emplace(*row[u], 0);
            }
    std::size_t pairable_items = 0;
    for (const auto& vals : item_values)
        if (vals.size() >= 2) ++pairable_items;
    if (pairable_items < 2)
        throw DataError("krippendorff_alpha: need at least 2 items with 2 ratings each");

    std::size_t k = 0;
    for (auto& [value, index] : value_index) index = k++;
    std::vector<double> values(k);
    for (const auto& [value, index] : value_index) values[index] = value;

    std::vector<std::vector<double>> coincidence(k, std::vector<double>(k, 0.0));
    for (const auto& vals : item_values) {
        if (vals.size() < 2) continue; // unpairable items carry no information
        double m = static_cast<double>(vals.size());
        for (std::size_t a = 0; a < vals.size(); ++a)
            for (std::size_t b = 0; b < vals.size(); ++b) {
                if (a == b) continue;
                coincidence[value_index[vals[a]]][value_index[vals[b]]] += 1.0 / (m - 1.0);
            }
    }

    std::vector<double> marginal(k, 0.0);
    double n = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t d = 0; d < k; ++d) {
            marginal[c] += coincidence[c][d];
            n += coincidence[c][d];
        }

    double observed = 0.0, expected = 0.0;
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t d = 0; d < k; ++d) {
            double diff = values[c] - values[d];
            double metric = diff * diff; // interval metric
            observed += coincidence[c][d] * metric;
            expected += marginal[c] * marginal[d] * metric;
        }
    observed /= n;
    expected /= n * (n - 1.0);
    if (expected == 0.0) return 1.0; // all ratings globally identical
    return 1.0 - observed / expected;
}

} // namespace seqbandit
