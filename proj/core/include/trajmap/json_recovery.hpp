#pragma once

#include <string>

#include <json.hpp>

namespace trajmap {

/// Pulls the first parseable JSON value out of model output. Strategies, in
/// order: the whole text, the contents of each ``` fenced block, the
/// substring from the first '{' to the last '}', then the substring from the
/// first '[' to the last ']'. Throws JsonRecoveryError when nothing parses.
nlohmann::json extract_json_block(const std::string& text);

}  // namespace trajmap
