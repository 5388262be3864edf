#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lela {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDocumentError = 1;
inline constexpr int kExitConfigError = 2;

/// Batch entry point. `out` receives JSONL when --output is absent; progress,
/// errors and the evaluation table go to `err`. Returns the process exit code:
/// 0 success, 1 when any document failed, 2 on usage or config errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Non-recursive expansion of directories into files with supported (or
/// explicitly rejected) extensions, sorted by name. Files pass through.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs);

}  // namespace lela
