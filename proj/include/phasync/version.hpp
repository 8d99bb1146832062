#pragma once

namespace phasync {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever a CSV column layout changes.
inline constexpr int kCsvLayoutVersion = 1;

}  // namespace phasync
