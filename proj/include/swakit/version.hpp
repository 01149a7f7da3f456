#pragma once

namespace swakit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace swakit
