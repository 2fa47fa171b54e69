#pragma once

namespace knncp {

inline constexpr const char* kVersion = "0.1.0";

} // namespace knncp
