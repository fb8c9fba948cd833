#pragma once

namespace probecap {
inline constexpr const char* kVersion = "0.1.0";
}
