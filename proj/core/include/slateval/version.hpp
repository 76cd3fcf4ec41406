#pragma once

namespace slateval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slateval
