#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace seqbandit {

struct CliOptions {
    std::string config_path;
    std::string out_dir;                    // overrides config.out_dir when set
    std::optional<std::uint64_t> seed;      // overrides config seeds when set
    std::string checkpoint_path;            // evaluate only
    bool quiet = false;
};

// Each command returns a process exit code: 0 success, 2 config error,
// 3 data error, 4 numerical failure.
int cmd_simulate_log(const CliOptions& options);
int cmd_train(const CliOptions& options);
int cmd_evaluate(const CliOptions& options);
int cmd_grad_check(const CliOptions& options);
int cmd_sweep(const CliOptions& options);

} // namespace seqbandit
