// cli.hpp - giantbic command-line front end.
//
// Exit codes: 0 success, 1 configuration error, 2 solver error,
// 3 acceptance check failed (run --check).

#pragma once

#include <exception>

namespace giantbic::cli {

constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitCheck = 3;

// Status for an exception escaping a subcommand.
int exit_code_for(const std::exception& e) noexcept;

int run(int argc, char** argv);

}  // namespace giantbic::cli
