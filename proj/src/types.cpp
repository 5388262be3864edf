#include "lela/types.hpp"

#include "lela/utf8.hpp"

namespace lela {

std::string_view to_string(Format f) {
  switch (f) {
    case Format::text: return "text";
    case Format::html: return "html";
    case Format::json: return "json";
    case Format::jsonl: return "jsonl";
    case Format::markdown: return "markdown";
  }
  return "text";
}

std::optional<Format> format_from_string(std::string_view name) {
  if (name == "text") return Format::text;
  if (name == "html") return Format::html;
  if (name == "json") return Format::json;
  if (name == "jsonl") return Format::jsonl;
  if (name == "markdown") return Format::markdown;
  return std::nullopt;
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::load: return "load";
    case Stage::ner: return "ner";
    case Stage::retrieve: return "retrieve";
    case Stage::rerank: return "rerank";
    case Stage::disambiguate: return "disambiguate";
  }
  return "load";
}

const Candidate* LinkResult::chosen() const {
  if (status != LinkStatus::linked) return nullptr;
  for (const auto& c : candidates) {
    if (c.entity_id == entity_id) return &c;
  }
  return nullptr;
}

std::optional<double> AnnotatedDocument::timing(Stage s) const {
  for (const auto& t : timings) {
    if (t.stage == s) return t.elapsed_ms;
  }
  return std::nullopt;
}

bool mention_is_valid(const Mention& m, std::string_view text) {
  if (!(m.score >= 0.0 && m.score <= 1.0)) return false;
  utf8::Index index(text);
  if (!(m.start < m.end && m.end <= index.size())) return false;
  return utf8::substr(text, index, m.start, m.end) == m.surface;
}

bool candidates_are_ranked(const std::vector<Candidate>& candidates) {
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].rank != i + 1) return false;
    if (i == 0) continue;
    const auto& prev = candidates[i - 1];
    const auto& cur = candidates[i];
    const double a = prev.rerank_score.value_or(prev.retrieval_score);
    const double b = cur.rerank_score.value_or(cur.retrieval_score);
    if (b > a) return false;
  }
  return true;
}

}  // namespace lela
