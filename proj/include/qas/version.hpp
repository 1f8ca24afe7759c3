#pragma once

namespace qas {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qas
