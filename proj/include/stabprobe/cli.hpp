#pragma once

#include <string>
#include <vector>

namespace stabprobe {

/// Entry point behind the stabprobe binary; also callable in-process from
/// tests. `args` excludes the program name. Returns the process exit code:
/// 0 success, 2 validation/domain errors (one JSON diagnostic line on
/// stderr), 64 usage errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace stabprobe
