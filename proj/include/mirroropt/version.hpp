#pragma once

namespace mirroropt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mirroropt
