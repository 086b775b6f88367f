#pragma once

namespace sfde {
inline constexpr const char* kVersion = "0.1.0";
}
