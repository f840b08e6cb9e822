#pragma once

namespace priorlens {

inline constexpr const char* kToolName = "prior-lens";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace priorlens
