#pragma once

namespace vie {
inline constexpr const char* kVersion = "0.1.0";
}
