#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lela/types.hpp"
#include "lela/utf8.hpp"

namespace lela {

inline constexpr std::size_t kDefaultChunkWindow = 2000;
inline constexpr std::size_t kDefaultChunkOverlap = 200;

struct Chunk {
  std::size_t doc_offset = 0;  // code points
  std::string text;
  std::size_t index = 0;

  std::size_t length() const;
};

/// Splits `text` into windows of `window` code points advancing by
/// window - overlap. A boundary that falls inside a word is moved left to the
/// nearest whitespace inside the overlap region, if any. The union of chunk
/// ranges always covers the whole text. Throws InvalidWindow unless window > overlap.
std::vector<Chunk> chunk(std::string_view text, std::size_t window = kDefaultChunkWindow,
                         std::size_t overlap = kDefaultChunkOverlap);

/// Shifts a chunk-local mention to document coordinates and checks its surface
/// against the document. Throws SurfaceMismatch on disagreement.
Mention remap(const Chunk& chunk, const Mention& local, std::string_view document_text);
Mention remap(const Chunk& chunk, const Mention& local, std::string_view document_text,
              const utf8::Index& document_index);

/// Collapses duplicates (same start, end, label; max score kept) and resolves
/// overlaps longest-first, then by higher score, then by smaller start. Output
/// is sorted by start and non-overlapping.
std::vector<Mention> merge_mentions(std::vector<Mention> mentions);

}  // namespace lela
