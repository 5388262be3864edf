#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace lela {

using json = nlohmann::json;

enum class Format { text, html, json, jsonl, markdown };

std::string_view to_string(Format f);
std::optional<Format> format_from_string(std::string_view name);

struct Document {
  std::string doc_id;
  std::string text;  // UTF-8
  std::string source = "inline";
  Format format = Format::text;
};

/// A detected span. Offsets are code points into Document::text, end exclusive.
struct Mention {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  std::string label;
  double score = 1.0;

  friend bool operator==(const Mention&, const Mention&) = default;
};

struct KBEntity {
  std::string id;
  std::string label;
  std::string description;
  /// Extra fields from the KB line, carried through untouched.
  json metadata = json::object();

  friend bool operator==(const KBEntity&, const KBEntity&) = default;
};

struct Candidate {
  std::string entity_id;
  std::string label;
  std::string description;
  double retrieval_score = 0.0;
  std::size_t rank = 0;  // 1 = best
  std::optional<double> rerank_score;
  json metadata = json::object();

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

enum class LinkStatus {
  unresolved,  // stages 2-4 disabled
  nil,
  linked,
};

struct VoteCount {
  std::optional<std::string> entity_id;  // nullopt = NIL
  int count = 0;

  friend bool operator==(const VoteCount&, const VoteCount&) = default;
};

struct LinkResult {
  Mention mention;
  LinkStatus status = LinkStatus::unresolved;
  std::string entity_id;  // set iff status == linked
  std::vector<VoteCount> votes;
  double confidence = 0.0;
  bool fallback_used = false;
  /// Candidates presented to the disambiguator (after cutoff).
  std::vector<Candidate> candidates;

  bool is_nil() const { return status == LinkStatus::nil; }
  const Candidate* chosen() const;
};

enum class Stage { load, ner, retrieve, rerank, disambiguate };

std::string_view to_string(Stage s);

struct StageTiming {
  Stage stage = Stage::load;
  double elapsed_ms = 0.0;
};

struct AnnotatedDocument {
  Document document;
  std::vector<LinkResult> results;
  std::vector<StageTiming> timings;

  std::optional<double> timing(Stage s) const;
};

/// Checks 0 <= start < end <= len(text), surface == text[start:end], score in [0,1].
bool mention_is_valid(const Mention& m, std::string_view text);

/// Checks ranks are 1..n in order and the governing score is non-increasing.
bool candidates_are_ranked(const std::vector<Candidate>& candidates);

}  // namespace lela
