#pragma once

namespace tsqp {

inline constexpr const char* kToolName = "tsqp";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace tsqp
