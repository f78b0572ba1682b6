#pragma once

namespace quakecast {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace quakecast
