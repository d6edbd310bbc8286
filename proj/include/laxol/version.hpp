#pragma once

namespace laxol {

inline constexpr const char* kVersion = "laxol 0.1.0";

}  // namespace laxol
