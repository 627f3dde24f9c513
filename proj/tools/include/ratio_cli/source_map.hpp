#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace ratio::cli {

/// Line of every value in a JSON document, keyed by JSON pointer
/// ("" is the root, "/data/in/n", "/eval/robust/0"). Built by a light
/// token scan; the document is assumed to have parsed already.
class SourceMap {
public:
  SourceMap() = default;
  explicit SourceMap(std::string_view text);

  /// Line (1-based) of `pointer`, or of its closest recorded ancestor.
  std::size_t line_of(const std::string &pointer) const;

private:
  std::map<std::string, std::size_t> lines_;
};

/// Line and column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset);

} // namespace ratio::cli
