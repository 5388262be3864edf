#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "lela/backends.hpp"
#include "lela/chunking.hpp"
#include "lela/kb.hpp"
#include "lela/types.hpp"

namespace lela {

struct NerParams {
  std::vector<std::string> labels;
  double threshold = 0.5;
  std::map<std::string, std::string> patterns;  // label -> POSIX extended regex
  std::size_t window = kDefaultChunkWindow;
  std::size_t overlap = kDefaultChunkOverlap;

  /// Reads labels, threshold, patterns, window, overlap. Throws InvalidParams.
  static NerParams from_json(const json& params);
};

/// Compiled patterns for the regex recognizer. Matching is leftmost-longest
/// (POSIX semantics) and non-overlapping per pattern.
class RegexRecognizer {
 public:
  /// Throws InvalidPattern when a pattern does not compile.
  explicit RegexRecognizer(const std::map<std::string, std::string>& patterns);

  /// Raw matches with score 1.0, sorted by start; overlaps across patterns are left in.
  std::vector<Mention> find(std::string_view text) const;

 private:
  std::vector<std::pair<std::string, std::regex>> patterns_;
};

/// Detects with the regex recognizer on each chunk and merges the results.
std::vector<Mention> regex_ner(std::string_view text, const NerParams& params);
std::vector<Mention> regex_ner(std::string_view text, const RegexRecognizer& recognizer, std::size_t window,
                               std::size_t overlap);

/// Case-insensitive whole-word dictionary matcher over KB labels. A label with
/// a trailing parenthetical qualifier ("Paris (city)") also matches without it.
class Gazetteer {
 public:
  explicit Gazetteer(const KnowledgeBase& kb);

  /// Longest match wins at each position; scanning resumes after a match.
  std::vector<Mention> find(std::string_view text) const;
  std::size_t name_count() const { return name_count_; }

 private:
  struct Node {
    std::map<char32_t, std::size_t> next;
    bool terminal = false;
  };
  void insert(const std::u32string& name);

  std::vector<Node> nodes_{1};
  std::size_t name_count_ = 0;
};

/// Surface forms the gazetteer indexes for one entity.
std::vector<std::string> gazetteer_names(const KBEntity& e);

std::vector<Mention> gazetteer_ner(std::string_view text, const KnowledgeBase& kb, const NerParams& params);

/// Sends chunk texts to POST {base}/ner and maps the returned spans back to
/// document offsets, dropping those under the threshold.
std::vector<Mention> remote_ner(const std::vector<Chunk>& chunks, std::string_view document_text,
                                const NerParams& params, const JsonClient& client);

}  // namespace lela
