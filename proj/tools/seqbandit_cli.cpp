// command line front end: simulate logged feedback, train policies on it,
// and inspect the results
#include <CLI11.hpp>

#include "seqbandit/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"offline sequence-policy training from logged feedback"};
    app.require_subcommand(1);

    seqbandit::CliOptions options;
    std::uint64_t seed_value = 0;

    auto add_common = [&](CLI::App* sub, bool with_checkpoint) {
        sub->add_option("--config", options.config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--out", options.out_dir, "output directory override");
        sub->add_option("--seed", seed_value, "seed override")
            ->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", options.quiet, "suppress progress output");
        if (with_checkpoint)
            sub->add_option("--checkpoint", options.checkpoint_path, "policy checkpoint")
                ->required();
    };

    CLI::App* simulate = app.add_subcommand("simulate-log", "generate a logged dataset");
    add_common(simulate, false);
    CLI::App* train = app.add_subcommand("train", "train every configured arm");
    add_common(train, false);
    CLI::App* evaluate = app.add_subcommand("evaluate", "report a checkpoint's value");
    add_common(evaluate, true);
    CLI::App* grad = app.add_subcommand("grad-check", "finite-difference gradient audit");
    add_common(grad, false);
    CLI::App* sweep = app.add_subcommand("sweep", "multi-seed log + train sweep");
    add_common(sweep, false);

    CLI11_PARSE(app, argc, argv);

    for (CLI::App* sub : {simulate, train, evaluate, grad, sweep})
        if (sub->parsed() && sub->count("--seed") > 0) options.seed = seed_value;

    if (simulate->parsed()) return seqbandit::cmd_simulate_log(options);
    if (train->parsed()) return seqbandit::cmd_train(options);
    if (evaluate->parsed()) return seqbandit::cmd_evaluate(options);
    if (grad->parsed()) return seqbandit::cmd_grad_check(options);
    return seqbandit::cmd_sweep(options);
}
