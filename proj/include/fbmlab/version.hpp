#pragma once

namespace fbmlab {
inline constexpr const char* kVersion = "0.1.0";
}
