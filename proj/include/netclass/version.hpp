#pragma once

namespace netclass {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace netclass
