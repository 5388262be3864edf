#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lela/types.hpp"

namespace lela {

struct RawInput {
  std::string bytes;
  std::optional<Format> declared_format;
  std::optional<std::string> path;
};

struct LoadOptions {
  /// Dotted path of the text field inside a JSON document ("text", "body.content").
  std::string json_text_field = "text";
};

/// Maps a file extension (case-insensitive) to a format. .pdf and .docx raise
/// UnsupportedFormat; a path without extension raises NoExtension.
Format detect_format(std::string_view path);

/// True for every extension detect_format knows about, including the rejected ones.
bool has_known_extension(std::string_view path);

/// Decodes an input into documents. Format comes from declared_format, else
/// from the path extension.
std::vector<Document> load(const RawInput& input, const LoadOptions& options = {});

RawInput read_input_file(const std::string& path);

/// Tag removal with block-level line breaks and entity decoding.
std::string html_to_text(std::string_view html);

}  // namespace lela
