#pragma once

namespace grou {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace grou
