#include "lela/chunking.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "lela/errors.hpp"
#include "lela/utf8.hpp"

namespace lela {

std::size_t Chunk::length() const { return utf8::length(text); }

namespace {

bool inside_word(const std::u32string& cps, std::size_t boundary) {
  return boundary > 0 && boundary < cps.size() && !utf8::is_space(cps[boundary - 1]) &&
         !utf8::is_space(cps[boundary]);
}

}  // namespace

std::vector<Chunk> chunk(std::string_view text, std::size_t window, std::size_t overlap) {
  if (window <= overlap) {
    throw InvalidWindow("chunk window (" + std::to_string(window) + ") must exceed overlap (" +
                        std::to_string(overlap) + ")");
  }
  const std::u32string cps = utf8::decode(text);
  const std::size_t n = cps.size();
  const std::size_t stride = window - overlap;

  std::vector<Chunk> chunks;
  if (n == 0) return chunks;

  std::size_t start = 0;
  for (std::size_t i = 0;; ++i) {
    std::size_t end = std::min(start + window, n);
    if (end < n && inside_word(cps, end)) {
      // The next chunk starts no later than start + stride, so any end at or
      // past that point keeps coverage.
      for (std::size_t p = end; p-- > start + stride;) {
        if (utf8::is_space(cps[p])) {
          end = p;
          break;
        }
      }
    }
    chunks.push_back(Chunk{start, utf8::encode(std::u32string_view(cps).substr(start, end - start)), i});
    if (end >= n) break;

    const std::size_t nominal = start + stride;
    std::size_t next = nominal;
    if (inside_word(cps, nominal)) {
      // Move left to just after a whitespace, within the overlap and strictly
      // after the current start.
      const std::size_t floor = std::max(start + 1, nominal >= overlap ? nominal - overlap : 0);
      for (std::size_t p = nominal; p-- > floor;) {
        if (utf8::is_space(cps[p])) {
          next = p + 1;
          break;
        }
      }
    }
    start = next;
  }
  return chunks;
}

Mention remap(const Chunk& chunk, const Mention& local, std::string_view document_text,
              const utf8::Index& document_index) {
  const std::size_t len = chunk.length();
  if (local.start >= local.end || local.end > len) {
    throw SurfaceMismatch("span [" + std::to_string(local.start) + "," + std::to_string(local.end) +
                          ") outside chunk " + std::to_string(chunk.index) + " of length " +
                          std::to_string(len));
  }
  Mention global = local;
  global.start = local.start + chunk.doc_offset;
  global.end = local.end + chunk.doc_offset;
  if (global.end > document_index.size()) {
    throw SurfaceMismatch("remapped span exceeds document length");
  }
  global.surface = utf8::substr(document_text, document_index, global.start, global.end);
  if (global.surface != local.surface) {
    throw SurfaceMismatch("surface mismatch at [" + std::to_string(global.start) + "," +
                          std::to_string(global.end) + "): expected '" + local.surface +
                          "', document has '" + global.surface + "'");
  }
  return global;
}

Mention remap(const Chunk& chunk, const Mention& local, std::string_view document_text) {
  return remap(chunk, local, document_text, utf8::Index(document_text));
}

std::vector<Mention> merge_mentions(std::vector<Mention> mentions) {
  std::map<std::tuple<std::size_t, std::size_t, std::string>, Mention> unique;
  for (auto& m : mentions) {
    auto key = std::make_tuple(m.start, m.end, m.label);
    auto it = unique.find(key);
    if (it == unique.end()) {
      unique.emplace(std::move(key), std::move(m));
    } else if (m.score > it->second.score) {
      it->second = std::move(m);
    }
  }

  std::vector<Mention> ordered;
  ordered.reserve(unique.size());
  for (auto& [key, m] : unique) ordered.push_back(std::move(m));
  std::stable_sort(ordered.begin(), ordered.end(), [](const Mention& a, const Mention& b) {
    const std::size_t la = a.end - a.start;
    const std::size_t lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return a.label < b.label;
  });

  // Accepted spans keyed by start; they never overlap each other.
  std::map<std::size_t, Mention> accepted;
  for (auto& m : ordered) {
    auto next = accepted.lower_bound(m.start);
    if (next != accepted.end() && next->first < m.end) continue;
    if (next != accepted.begin() && std::prev(next)->second.end > m.start) continue;
    accepted.emplace(m.start, std::move(m));
  }

  std::vector<Mention> out;
  out.reserve(accepted.size());
  for (auto& [start, m] : accepted) out.push_back(std::move(m));
  return out;
}

}  // namespace lela
