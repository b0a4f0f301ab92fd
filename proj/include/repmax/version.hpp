#pragma once

namespace repmax {

inline constexpr const char* kToolName = "repmax";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace repmax
