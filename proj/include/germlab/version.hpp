#pragma once

namespace germlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace germlab
