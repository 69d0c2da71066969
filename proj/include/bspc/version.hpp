#pragma once

namespace bspc {

inline constexpr const char* kLibraryVersion = "0.1.0";

}  // namespace bspc
