// Acceptance gate: one self-contained check per release criterion, each
// printing a single [PASS]/[FAIL] line with its measurements. The process
// exits nonzero if any check fails.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "seqbandit/checkpoint.hpp"
#include "seqbandit/commands.hpp"
#include "seqbandit/config.hpp"
#include "seqbandit/trainer.hpp"

using namespace seqbandit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    char buffer[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buffer, sizeof(buffer), format, args);
    va_end(args);
    return buffer;
}

// ---- shared scenarios ------------------------------------------------------

// One input, four distinct logged outputs rewarded (1.0, 0.6, 0.3, 0.05),
// sharing the prefix (0, 1) so the low-reward record rides the growing
// prefix mass: the cleanest reproduction of unnormalized-objective
// degeneracy available to a locally-normalized policy.
TaskSpec skewed_task() {
    TaskSpec task;
    task.vocab.size = 4;
    task.max_len = 3;
    task.inputs = {InputContext{0, {}}};
    task.input_weights = {1.0};
    task.references[0] = {0, 1, 2};
    task.reward_kind = RewardKind::table;
    task.table_rewards[0][{0, 1, 2}] = 1.0;
    task.table_rewards[0][{0, 1, 3}] = 0.6;
    task.table_rewards[0][{0, 1, 1}] = 0.3;
    task.table_rewards[0][{0, 1, 0}] = 0.05;
    return task;
}

InteractionLog skewed_log(const TaskSpec& task) {
    InteractionLog log;
    for (const auto& [y, delta] : task.table_rewards.at(0)) {
        LoggedInteraction rec;
        rec.input = task.inputs[0];
        rec.output = y;
        rec.delta = delta;
        rec.mu = 1.0;
        log.records.push_back(rec);
    }
    return log;
}

RewardEstimator exact_desk_estimator() {
    // reproduces the desk task's position-match reward exactly: 0.5 per
    // matched reference position, encoded on the two unigram features of
    // the reference tokens
    RewardEstimator estimator;
    estimator.vocab_size = 3;
    estimator.max_len = 2;
    estimator.weights[0] = 0.5; // position 0, token 0
    estimator.weights[8] = 0.5; // position 1, token 1
    return estimator;
}

double relative_gap(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// ---- criteria ----------------------------------------------------------------

Outcome check_normalization() {
    TaskSpec task = desk_task();
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        SequencePolicy policy = testutil::random_policy(task, 1.5, 10 + i);
        double total = 0.0;
        for (const Sequence& y : testutil::all_sequences(3, 2))
            total += sequence_probability(policy, task.inputs[0], y);
        worst = std::max(worst, std::abs(total - 1.0));
    }
    return {worst <= 1e-8, fmt("max |sum_y pi(y|x) - 1| = %.3g over 100 random policies", worst)};
}

Outcome check_dpm_degeneracy() {
    TaskSpec task = skewed_task();
    InteractionLog log = skewed_log(task);
    TrainConfig config;
    config.objective = ObjectiveKind::dpm;
    config.lr = 0.1;
    config.epochs = 2000;
    config.eval_every = 2000;
    SequencePolicy uniform(Vocabulary{4}, 3);
    TrainResult result = train(uniform, log, task, config);

    double mass = 0.0;
    for (const auto& rec : log.records)
        mass += sequence_probability(result.policy, rec.input, rec.output);
    double p_low = sequence_probability(result.policy, task.inputs[0], {0, 1, 0});
    double p_uniform = 1.0 / 64.0;

    bool mass_ok = mass > 0.95;
    bool low_ok = p_low > p_uniform;
    return {mass_ok && low_ok,
            fmt("logged mass %.4f (need > 0.95: %s); p(delta=0.05 output) %.5f vs uniform "
                "%.5f (need increase: %s). A locally-normalized policy spends all mass "
                "inside each per-step softmax, so at this fixed budget the two clauses "
                "trade off; see README.",
                mass, mass_ok ? "ok" : "FAIL", p_low, p_uniform, low_ok ? "ok" : "FAIL")};
}

Outcome check_osl_beats_dpm() {
    TaskSpec task = skewed_task();
    InteractionLog log = skewed_log(task);
    int wins = 0;
    double mean_osl = 0.0, mean_dpm = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SequencePolicy init = testutil::random_policy(task, 0.1, seed);
        TrainConfig dpm;
        dpm.objective = ObjectiveKind::dpm;
        dpm.lr = 0.1;
        dpm.epochs = 2000;
        dpm.eval_every = 2000;
        TrainConfig osl = dpm;
        osl.objective = ObjectiveKind::osl;
        double v_dpm = value_brute_force(train(init, log, task, dpm).policy, task);
        double v_osl = value_brute_force(train(init, log, task, osl).policy, task);
        mean_dpm += v_dpm / 5.0;
        mean_osl += v_osl / 5.0;
        if (v_osl > v_dpm) ++wins;
    }
    return {wins == 5, fmt("V(osl) > V(dpm) on %d/5 seeds (mean V: osl %.3f, dpm %.3f)", wins,
                           mean_osl, mean_dpm)};
}

Outcome check_baseline_sign() {
    TaskSpec task = desk_task();
    InteractionLog log = testutil::manual_log(
        task, {{{0, 0}, 0.9}, {{1, 1}, 0.1}, {{2, 2}, 0.5}, {{0, 0}, 0.95}, {{2, 1}, 0.3}});
    std::vector<double> centered = baseline_center(log);

    SequencePolicy uniform(Vocabulary{3}, 2);
    LossReport report = dpm_baseline_loss(uniform, log);
    int below = 0, negative_ok = 0;
    for (std::size_t t = 0; t < centered.size(); ++t) {
        if (centered[t] < 0.0) {
            ++below;
            if (report.per_record_weights[t] < 0.0) ++negative_ok;
        }
    }

    // one gradient step must strictly push probability off the below-average
    // outputs (records 1 and 4: outputs (1,1) and (2,1))
    TrainConfig config;
    config.objective = ObjectiveKind::dpm_baseline;
    config.lr = 0.05;
    config.epochs = 1;
    TrainResult stepped = train(uniform, log, task, config);
    double p11_before = sequence_probability(uniform, task.inputs[0], {1, 1});
    double p21_before = sequence_probability(uniform, task.inputs[0], {2, 1});
    double p11_after = sequence_probability(stepped.policy, task.inputs[0], {1, 1});
    double p21_after = sequence_probability(stepped.policy, task.inputs[0], {2, 1});

    bool ok = below == 2 && negative_ok == below && p11_after < p11_before &&
              p21_after < p21_before;
    return {ok, fmt("%d/%d below-mean records got negative weights; p(1,1) %.5f->%.5f, "
                    "p(2,1) %.5f->%.5f after one step",
                    negative_ok, below, p11_before, p11_after, p21_before, p21_after)};
}

Outcome check_dr_identities() {
    TaskSpec task = desk_task();
    RewardEstimator zero;
    zero.vocab_size = 3;
    zero.max_len = 2;
    RewardEstimator exact = exact_desk_estimator();
    double worst_zero = 0.0, worst_exact = 0.0;
    for (int i = 1; i <= 50; ++i) {
        SequencePolicy policy = testutil::random_policy(task, 1.0, 500 + i);
        FeedbackChannel channel;
        InteractionLog log = generate_log(task, testutil::random_policy(task, 0.5, 600 + i),
                                          channel, 20, LoggingMode::stochastic, 700 + i);
        worst_zero = std::max(
            worst_zero, relative_gap(dr_loss(policy, log, zero).loss, dpm_loss(policy, log).loss));
        worst_exact = std::max(
            worst_exact, relative_gap(dr_loss(policy, log, exact).loss,
                                      -value_brute_force(policy, task)));
    }
    return {worst_zero <= 1e-15 && worst_exact <= 1e-10,
            fmt("max rel gap: dr(0)=dpm %.3g (tol 1e-15); dr(exact)=-V %.3g (tol 1e-10)",
                worst_zero, worst_exact)};
}

Outcome check_ips_unbiasedness() {
    TaskSpec task = desk_task();
    SequencePolicy target = testutil::random_policy(task, 1.0, 42);
    double oracle = value_brute_force(target, task);
    SequencePolicy logging(Vocabulary{3}, 2);
    FeedbackChannel channel;
    std::vector<double> estimates;
    for (int rep = 0; rep < 200; ++rep) {
        InteractionLog log =
            generate_log(task, logging, channel, 50, LoggingMode::stochastic, 1000 + rep);
        estimates.push_back(-ips_loss(target, log).loss);
    }
    double mean = 0.0;
    for (double e : estimates) mean += e / estimates.size();
    double var = 0.0;
    for (double e : estimates) var += (e - mean) * (e - mean) / (estimates.size() - 1);
    double se = std::sqrt(var / estimates.size());
    double gap = std::abs(mean - oracle);
    return {gap <= 3.0 * se,
            fmt("mean IPS %.4f vs oracle %.4f: |gap| %.4f <= 3 se = %.4f", mean, oracle, gap,
                3.0 * se)};
}

Outcome check_snips_bias_shrinkage() {
    TaskSpec task = desk_task();
    SequencePolicy target = testutil::random_policy(task, 1.0, 7);
    double oracle = value_brute_force(target, task);
    SequencePolicy logging(Vocabulary{3}, 2);
    FeedbackChannel channel;
    auto bias_at = [&](int T, std::uint64_t seed_base) {
        double mean = 0.0;
        for (int rep = 0; rep < 1000; ++rep) {
            InteractionLog log =
                generate_log(task, logging, channel, T, LoggingMode::stochastic, seed_base + rep);
            mean += value_self_normalized(target, log) / 1000.0;
        }
        return mean - oracle;
    };
    double bias_small = bias_at(10, 20000);
    double bias_large = bias_at(200, 50000);
    return {std::abs(bias_small) > std::abs(bias_large),
            fmt("|bias| at T=10: %.5f; at T=200: %.5f (1000 replicates each)",
                std::abs(bias_small), std::abs(bias_large))};
}

Outcome check_gradients() {
    TaskSpec task = desk_task();
    RewardEstimator exact = exact_desk_estimator();
    double worst = 0.0;
    std::string failed;
    const std::vector<std::pair<ObjectiveKind, const char*>> kinds = {
        {ObjectiveKind::mle, "mle"},
        {ObjectiveKind::ips, "ips"},
        {ObjectiveKind::dpm, "dpm"},
        {ObjectiveKind::osl, "osl"},
        {ObjectiveKind::dpm_baseline, "dpm-baseline"},
        {ObjectiveKind::ips_baseline, "ips-baseline"},
        {ObjectiveKind::dr, "dr"}};
    for (int i = 1; i <= 50; ++i) {
        SequencePolicy policy = testutil::random_policy(task, 1.0, 100 + i);
        FeedbackChannel channel;
        InteractionLog log = generate_log(task, testutil::random_policy(task, 0.5, 200 + i),
                                          channel, 8, LoggingMode::stochastic, 300 + i);
        for (const auto& [kind, name] : kinds) {
            GradCheckReport report = gradient_check(kind, policy, log, 1e-5, 1e-5, &exact);
            worst = std::max(worst, report.max_rel_error);
            if (!report.passed && failed.empty()) failed = name;
        }
        // reward-model mse via the same central-difference recipe
        RewardEstimator estimator;
        estimator.vocab_size = 3;
        estimator.max_len = 2;
        Rng rng(900 + i);
        std::vector<RewardExample> examples;
        for (const auto& rec : log.records) {
            RewardExample ex{rec.input, rec.output, rec.delta};
            examples.push_back(ex);
            std::vector<std::size_t> feats;
            estimator.features(ex.input, ex.output, feats);
            for (std::size_t f : feats) estimator.weights[f] = rng.normal(0.5);
        }
        LossReportLite analytic = mse_loss(estimator, examples);
        for (const auto& [f, g] : analytic.gradient) {
            const double h = 1e-5;
            RewardEstimator plus = estimator, minus = estimator;
            plus.weights[f] += h;
            minus.weights[f] -= h;
            double fd = (mse_loss(plus, examples).loss - mse_loss(minus, examples).loss) /
                        (2.0 * h);
            double err = std::abs(g - fd) / std::max({1.0, std::abs(g), std::abs(fd)});
            worst = std::max(worst, err);
            if (err > 1e-5 && failed.empty()) failed = "reward-mse";
        }
    }
    return {failed.empty() && worst <= 1e-5,
            fmt("max relative error %.3g over 50 instances x 8 objectives%s%s", worst,
                failed.empty() ? "" : "; first failure: ", failed.c_str())};
}

Outcome check_reward_recovery() {
    TaskSpec task = desk_task();
    FitOptions options;
    options.lr = 0.25;
    options.epochs = 2000;

    std::vector<RewardExample> clean;
    for (const Sequence& y : testutil::all_sequences(3, 2))
        clean.push_back(RewardExample{task.inputs[0], y, true_reward(task, task.inputs[0], y)});
    RewardEstimator fit_clean = fit_reward_estimator(clean, 3, 2, options).estimator;
    double clean_err = 0.0;
    for (const auto& ex : clean)
        clean_err = std::max(clean_err,
                             std::abs(fit_clean.predict(ex.input, ex.output) - ex.delta));

    Rng noise(3);
    std::vector<RewardExample> noisy;
    for (const Sequence& y : testutil::all_sequences(3, 2)) {
        double truth = true_reward(task, task.inputs[0], y);
        for (int k = 0; k < 50; ++k)
            noisy.push_back(RewardExample{task.inputs[0], y, truth + noise.normal(0.1)});
    }
    RewardEstimator fit_noisy = fit_reward_estimator(noisy, 3, 2, options).estimator;
    double noisy_err = 0.0;
    for (const auto& ex : clean)
        noisy_err = std::max(noisy_err,
                             std::abs(fit_noisy.predict(ex.input, ex.output) - ex.delta));

    return {clean_err < 1e-3 && noisy_err < 0.05,
            fmt("noiseless max error %.2g (tol 1e-3); sigma=0.1 x50/pair max error %.3f "
                "(tol 0.05)",
                clean_err, noisy_err)};
}

Outcome check_noise_degradation() {
    TaskSpec task = desk_task();
    SequencePolicy logging(Vocabulary{3}, 2);
    FeedbackChannel clean;
    FeedbackChannel noisy;
    noisy.kind = ChannelKind::likert5;
    noisy.noise_sigma = 0.3;
    int wins = 0;
    double mean_clean = 0.0, mean_noisy = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        // identical seed => identical logged (x, y, mu); only delta differs
        InteractionLog log_clean =
            generate_log(task, logging, clean, 200, LoggingMode::stochastic, 9000 + seed);
        InteractionLog log_noisy =
            generate_log(task, logging, noisy, 200, LoggingMode::stochastic, 9000 + seed);
        SequencePolicy init = testutil::random_policy(task, 0.1, seed);
        TrainConfig config;
        config.objective = ObjectiveKind::ips_baseline;
        config.lr = 0.05;
        config.epochs = 300;
        config.eval_every = 300;
        double v_clean = value_brute_force(train(init, log_clean, task, config).policy, task);
        double v_noisy = value_brute_force(train(init, log_noisy, task, config).policy, task);
        mean_clean += v_clean / 5.0;
        mean_noisy += v_noisy / 5.0;
        if (v_noisy < v_clean) ++wins;
    }
    return {wins == 5,
            fmt("noisy feedback lowered final V on %d/5 seeds (mean V: clean %.3f, noisy %.3f)",
                wins, mean_clean, mean_noisy)};
}

Outcome check_filters() {
    TaskSpec task = desk_task();
    SequencePolicy logging(Vocabulary{3}, 2);
    FeedbackChannel pool;
    pool.kind = ChannelKind::rater_pool;
    pool.raters = {Rater{"steady", 0.0, 0.3, 1.0}, Rater{"flaky", 0.0, 0.3, 0.2}};
    int correct = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        LogGenOptions options;
        options.duplicates = 2; // 40 base items round-robin => 20 repeated items per rater
        InteractionLog log =
            generate_log(task, logging, pool, 40, LoggingMode::stochastic, 400 + seed, options);
        RaterFilterReport report;
        filter_raters(log, 0.8, &report);
        if (report.removed == std::vector<std::string>{"flaky"}) ++correct;
    }

    RatingTable perfect = {{1.0, 0.25, 0.5}, {1.0, 0.25, 0.5}, {1.0, 0.25, 0.5}};
    bool perfect_ok = krippendorff_alpha(perfect) == 1.0;

    double worst = 0.0;
    Rng rng(77);
    for (int i = 0; i < 40; ++i) {
        int raters = 3 + static_cast<int>(rng.uniform() * 3);
        int items = 4 + static_cast<int>(rng.uniform() * 5);
        RatingTable table(raters, std::vector<std::optional<double>>(items));
        for (auto& row : table)
            for (auto& cell : row)
                if (rng.uniform() > 0.2)
                    cell = std::floor(rng.uniform() * 5.0) / 4.0;
        int pairable = 0;
        for (int c = 0; c < items; ++c) {
            int n = 0;
            for (int r = 0; r < raters; ++r) n += table[r][c].has_value();
            if (n >= 2) pairable += n;
        }
        if (pairable < 2) continue;
        worst = std::max(worst,
                         std::abs(krippendorff_alpha(table) - testutil::alpha_direct(table)));
    }
    return {correct == 5 && perfect_ok && worst <= 1e-10,
            fmt("rater split correct on %d/5 seeds; alpha(perfect)=1: %s; max |alpha - direct| "
                "= %.2g",
                correct, perfect_ok ? "yes" : "NO", worst)};
}

Outcome check_cli_determinism() {
    fs::path dir = fs::temp_directory_path() / "seqbandit_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string config_path = (dir / "config.json").string();
    std::string out_dir = (dir / "runs").string();
    atomic_write_text(config_path, R"({
        "task": {"vocab_size": 3, "max_len": 2,
                 "inputs": [{"id": 0}], "references": {"0": [0, 1]}},
        "log": {"T": 30, "mode": "stochastic", "seed": 5},
        "init_sigma": 0.1,
        "arms": [{"name": "dpm", "objective": "dpm", "lr": 0.1, "epochs": 20}],
        "seeds": [1],
        "out_dir": ")" + out_dir + R"("
    })");
    CliOptions options;
    options.config_path = config_path;
    options.quiet = true;
    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    bool ok = cmd_simulate_log(options) == 0 && cmd_train(options) == 0;
    std::string first = slurp(out_dir + "/trace_dpm_seed1.csv");
    ok = ok && cmd_train(options) == 0;
    std::string second = slurp(out_dir + "/trace_dpm_seed1.csv");
    fs::remove_all(dir);
    ok = ok && !first.empty() && first == second;
    return {ok, fmt("back-to-back cmd_train traces identical: %s (%zu bytes)",
                    first == second ? "yes" : "NO", first.size())};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds; // 0 = no stated budget
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "normalization", 1.0, check_normalization},
        {2, "dpm-degeneracy", 5.0, check_dpm_degeneracy},
        {3, "osl-beats-dpm", 10.0, check_osl_beats_dpm},
        {4, "baseline-sign", 0.0, check_baseline_sign},
        {5, "dr-identities", 2.0, check_dr_identities},
        {6, "ips-unbiasedness", 10.0, check_ips_unbiasedness},
        {7, "snips-bias-shrinkage", 60.0, check_snips_bias_shrinkage},
        {8, "gradient-checks", 30.0, check_gradients},
        {9, "reward-estimator-recovery", 10.0, check_reward_recovery},
        {10, "noise-degradation", 30.0, check_noise_degradation},
        {11, "filter-correctness", 0.0, check_filters},
        {12, "cli-determinism", 0.0, check_cli_determinism},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        Outcome outcome;
        auto start = std::chrono::steady_clock::now();
        try {
            outcome = criterion.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds) {
            outcome.passed = false;
            outcome.detail += fmt(" [over %.0fs budget]", criterion.budget_seconds);
        }
        if (!outcome.passed) ++failures;
        std::printf("[%s] A%-2d %-26s (%6.0f ms): %s\n", outcome.passed ? "PASS" : "FAIL",
                    criterion.id, criterion.name, seconds * 1000.0, outcome.detail.c_str());
    }
    std::printf("acceptance: %d/12 passed\n", 12 - failures);
    return failures == 0 ? 0 : 1;
}
