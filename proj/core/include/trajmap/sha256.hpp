#pragma once

#include <string>
#include <string_view>

namespace trajmap {

/// SHA-256 digest as a 64-character lowercase hex string. Stable across
/// platforms; used for request cache keys and replay file names.
std::string sha256_hex(std::string_view data);

}  // namespace trajmap
