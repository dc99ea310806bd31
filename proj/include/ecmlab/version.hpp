#pragma once

namespace ecmlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ecmlab
