#pragma once

namespace csi {

inline constexpr const char* kToolName = "csi-toolkit";
inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace csi
