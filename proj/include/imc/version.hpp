#pragma once

namespace imc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace imc
