#pragma once

namespace cotforge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace cotforge
