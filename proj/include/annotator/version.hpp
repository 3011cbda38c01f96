#pragma once

namespace annotator {

inline constexpr const char* kToolName = "annotator";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace annotator
