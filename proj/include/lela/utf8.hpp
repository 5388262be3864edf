#pragma once

// UTF-8 helpers. Every span offset in the library counts Unicode code points;
// strings are stored as UTF-8 and converted at the boundaries below.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace lela::utf8 {

/// Decodes UTF-8; throws DecodeError on malformed input.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view cps);
void append(std::string& out, char32_t cp);

bool is_valid(std::string_view bytes);
std::size_t length(std::string_view bytes);

char32_t to_lower(char32_t cp);
bool is_alnum(char32_t cp);
bool is_space(char32_t cp);

std::u32string lower(std::u32string_view cps);
std::string lower(std::string_view bytes);

/// Maps code point offsets to byte offsets for one UTF-8 string.
class Index {
 public:
  explicit Index(std::string_view text);

  std::size_t size() const { return starts_.size() - 1; }
  std::size_t byte_offset(std::size_t cp) const { return starts_.at(cp); }
  /// Code point containing `byte`; `byte` must sit on a boundary or at the end.
  std::size_t cp_offset(std::size_t byte) const;

 private:
  std::vector<std::size_t> starts_;
};

/// text[start:end) in code points.
std::string substr(std::string_view text, const Index& index, std::size_t start, std::size_t end);
std::string substr(std::string_view text, std::size_t start, std::size_t end);

}  // namespace lela::utf8
