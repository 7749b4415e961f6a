#pragma once

namespace stabprobe {

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace stabprobe
