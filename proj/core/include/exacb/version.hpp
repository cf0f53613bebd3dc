#pragma once

namespace exacb {

inline constexpr const char* kToolVersion = "0.1.0";

// Report schema versions this build can read and the one it writes.
inline constexpr const char* kSchemaVersion = "1";

}  // namespace exacb
