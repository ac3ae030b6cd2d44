#pragma once

namespace careerscape {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace careerscape
