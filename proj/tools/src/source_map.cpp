#include "ratio_cli/source_map.hpp"

#include <cctype>
#include <vector>

namespace ratio::cli {

namespace {

std::string escape_token(const std::string &key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

struct Frame {
  bool object = false;
  std::string pointer;
  std::string key;         // pending key inside an object
  std::size_t index = 0;   // next index inside an array
};

} // namespace

SourceMap::SourceMap(std::string_view text) {
  std::vector<Frame> stack;
  std::size_t line = 1;
  bool expect_key = false;

  const auto child_pointer = [&]() -> std::string {
    if (stack.empty()) return "";
    Frame &f = stack.back();
    if (f.object) return f.pointer + "/" + escape_token(f.key);
    return f.pointer + "/" + std::to_string(f.index++);
  };
  const auto record = [&](const std::string &p) { lines_.emplace(p, line); };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) || c == ':') continue;
    if (c == ',') {
      expect_key = !stack.empty() && stack.back().object;
      continue;
    }
    if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
      expect_key = false;
      continue;
    }
    if (c == '"') {
      std::string s;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          ++i;
          s += text[i] == 'n' ? '\n' : text[i];
        } else {
          if (text[i] == '\n') ++line;
          s += text[i];
        }
      }
      if (expect_key) {
        stack.back().key = s;
        expect_key = false;
      } else {
        record(child_pointer());
      }
      continue;
    }
    if (c == '{' || c == '[') {
      const std::string p = child_pointer();
      record(p);
      stack.push_back({c == '{', p, {}, 0});
      expect_key = c == '{';
      continue;
    }
    // number or literal: consume the token
    record(child_pointer());
    while (i + 1 < text.size() && text[i + 1] != ',' && text[i + 1] != '}' && text[i + 1] != ']' &&
           !std::isspace(static_cast<unsigned char>(text[i + 1])))
      ++i;
  }
}

std::size_t SourceMap::line_of(const std::string &pointer) const {
  std::string p = pointer;
  for (;;) {
    if (const auto it = lines_.find(p); it != lines_.end()) return it->second;
    if (p.empty()) return 1;
    p.erase(p.rfind('/'));
  }
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

} // namespace ratio::cli
