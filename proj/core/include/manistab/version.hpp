#pragma once

namespace manistab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace manistab
