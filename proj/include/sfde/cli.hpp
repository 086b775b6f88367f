#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace sfde::cli {

// Bad configuration: reported with exit status 2, and nothing is computed or
// written when it is thrown.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Execution failure after validation (solver divergence, failed diagnostic
// assertion): exit status 1.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

nlohmann::json default_config(const std::string& subcommand);

// Deep-merge overlay into base (overlay wins; objects merge recursively).
nlohmann::json merge_config(nlohmann::json base, const nlohmann::json& overlay);

// Apply "dotted.key=value" overrides; values parse as JSON when possible,
// otherwise as strings.
void apply_dotted_overrides(nlohmann::json& config,
                            const std::vector<std::string>& overrides);

// Expand shorthand strings (coefficient/xi/inject), fill derived defaults,
// and check every numeric field against the module preconditions. Returns the
// fully resolved config that the manifest echoes.
nlohmann::json resolve_config(const std::string& subcommand,
                              nlohmann::json config);

struct ExecutionResult {
  std::vector<std::string> files;  // artifact names written into out_dir
  bool checks_passed = true;       // false when an enabled assertion failed
  std::string failure;             // the failing quantity, when any
};

// Run one subcommand with a resolved config, writing all artifacts plus
// manifest.json into out_dir. Throws ValidationError for overwrite without
// force; computes everything before the first byte is written.
ExecutionResult execute(const std::string& subcommand,
                        const nlohmann::json& resolved,
                        const std::string& out_dir, bool force);

// Full command-line entry point (argument parsing, dispatch, exit code).
int main_entry(int argc, const char* const* argv);

}  // namespace sfde::cli
