#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lela/types.hpp"

namespace lela {

/// Immutable, file-ordered entity store loaded from JSONL.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(std::vector<KBEntity> entities);

  std::size_t size() const { return entities_.size(); }
  bool empty() const { return entities_.empty(); }
  const std::vector<KBEntity>& entities() const { return entities_; }
  const KBEntity& at(std::size_t index) const { return entities_.at(index); }

  const KBEntity* find(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;

 private:
  std::vector<KBEntity> entities_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Parses KB JSONL content. Keys "id", "label", "description"; other keys are
/// kept as metadata. Empty lines are skipped but still counted for line numbers.
KnowledgeBase parse_kb(std::string_view content);
KnowledgeBase load_kb(const std::string& path);

/// One JSON object per line, in KB order. parse_kb(serialize_kb(kb)) == kb.
std::string serialize_kb(const KnowledgeBase& kb);

/// "{label}: {description}", or the label alone when the description is empty.
std::string candidate_text(const KBEntity& e);

Candidate make_candidate(const KBEntity& e, double score, std::size_t rank);

}  // namespace lela
