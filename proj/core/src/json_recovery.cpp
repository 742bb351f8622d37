#include "trajmap/json_recovery.hpp"

#include <optional>
#include <string_view>
#include <vector>

#include "trajmap/errors.hpp"

namespace trajmap {

namespace {

std::optional<nlohmann::json> try_parse(std::string_view text) {
  nlohmann::json value = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) {
    return std::nullopt;
  }
  return value;
}

std::string_view trimmed(std::string_view text) {
  std::size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) {
    return {};
  }
  std::size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

// Contents of every ```-fenced block, language tags stripped.
std::vector<std::string_view> fenced_blocks(std::string_view text) {
  std::vector<std::string_view> blocks;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = text.find("```", pos);
    if (open == std::string_view::npos) {
      break;
    }
    std::size_t body = text.find('\n', open);
    if (body == std::string_view::npos) {
      break;
    }
    ++body;
    std::size_t close = text.find("```", body);
    if (close == std::string_view::npos) {
      break;
    }
    blocks.push_back(text.substr(body, close - body));
    pos = close + 3;
  }
  return blocks;
}

std::optional<nlohmann::json> try_span(std::string_view text, char open, char close) {
  std::size_t first = text.find(open);
  std::size_t last = text.rfind(close);
  if (first == std::string_view::npos || last == std::string_view::npos || last <= first) {
    return std::nullopt;
  }
  return try_parse(text.substr(first, last - first + 1));
}

}  // namespace

nlohmann::json extract_json_block(const std::string& text) {
  if (auto value = try_parse(trimmed(text))) {
    return *value;
  }
  for (std::string_view block : fenced_blocks(text)) {
    if (auto value = try_parse(trimmed(block))) {
      return *value;
    }
  }
  if (auto value = try_span(text, '{', '}')) {
    return *value;
  }
  if (auto value = try_span(text, '[', ']')) {
    return *value;
  }
  throw JsonRecoveryError("no JSON value found in model output (" +
                          std::to_string(text.size()) + " bytes)");
}

}  // namespace trajmap
