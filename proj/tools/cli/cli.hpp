#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace expint::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_runtime = 2 };

/// Runs one command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

bool failure_injection_enabled() noexcept;

struct VerifyOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// stencil, leja, partition, order.
const std::vector<std::string>& verify_suite_names();
VerifyOutcome run_verify_suite(const std::string& name);

} // namespace expint::cli
