#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lela/backends.hpp"
#include "lela/types.hpp"

namespace lela {

inline constexpr std::size_t kDefaultContextWindow = 256;

/// Prompt template revision. Bump whenever kPromptTemplate changes.
inline constexpr std::string_view kPromptVersion = "lela-disambiguate-v1";

/// Placeholders: {context}, {mention}, {options}, {nil_index}.
inline constexpr std::string_view kPromptTemplate =
    "You are an entity linking system. In the context below, one entity mention is marked "
    "with square brackets.\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Mention: {mention}\n"
    "\n"
    "Which of the following knowledge base entities does the bracketed mention refer to?\n"
    "{options}\n"
    "\n"
    "Answer with a single number: the index of the matching entity, or {nil_index} if none of "
    "the candidates match.";

struct PromptOption {
  std::size_t index = 0;
  std::string label;
  std::string description;
};

struct PromptSpec {
  std::string context;  // exactly one [bracketed] region
  std::string mention_surface;
  std::vector<PromptOption> options;
  std::size_t nil_index = 1;  // options.size() + 1

  /// Fully rendered user message.
  std::string render() const;
};

/// doc.text[max(0, start - window) : min(len, end + window)] with the mention
/// wrapped in "[" and "]". Square brackets elsewhere in the window become
/// parentheses so the marked region stays unique.
std::string bracketed_context(const Document& doc, const Mention& mention, std::size_t window);

PromptSpec build_prompt(const Document& doc, const Mention& mention, std::span<const Candidate> candidates,
                        std::size_t ctx_window = kDefaultContextWindow);

struct Vote {
  enum class Kind { candidate, nil, invalid };
  std::string raw;
  Kind kind = Kind::invalid;
  std::size_t index = 0;  // 1-based, set when kind == candidate

  static Vote for_candidate(std::size_t i) { return Vote{{}, Kind::candidate, i}; }
  static Vote nil() { return Vote{{}, Kind::nil, 0}; }
  static Vote invalid() { return Vote{{}, Kind::invalid, 0}; }
};

/// Extracts the first integer from the completion after removing <think>
/// blocks: 1..k selects a candidate, k+1 is NIL, anything else is invalid.
Vote parse_choice(std::string_view completion, std::size_t k);

struct Consensus {
  enum class Kind { candidate, nil, fallback };
  Kind kind = Kind::nil;
  std::size_t index = 0;  // 1-based candidate index for candidate/fallback
  int winning_votes = 0;
  int valid_votes = 0;
  std::vector<int> candidate_counts;  // per index, 0-based
  int nil_count = 0;
};

/// Plurality over valid votes. Tied candidates resolve to the smaller index; a
/// candidate tied with NIL wins. With no valid votes the rank-1 candidate is
/// chosen as a fallback, or NIL when there are no candidates.
Consensus self_consistency(std::span<const Vote> votes, std::size_t k);

/// Turns a consensus into a LinkResult over the presented candidates.
LinkResult make_link_result(const Mention& mention, std::span<const Candidate> candidates, const Consensus& c);

/// Retrieval-rank baseline: the rank-1 candidate, or NIL for an empty list.
LinkResult disambiguate_first(const Mention& mention, std::span<const Candidate> candidates);

struct LlmParams {
  int n_samples = 3;
  std::optional<double> temperature;  // default 0.6 when n_samples > 1, else 0
  std::size_t ctx_window = kDefaultContextWindow;
  std::string system_prompt;

  double effective_temperature() const { return temperature.value_or(n_samples > 1 ? 0.6 : 0.0); }
};

/// One chat request with n = n_samples; votes are parsed and aggregated.
/// Transport or API failures degrade to the retrieval-rank baseline with
/// fallback_used set.
LinkResult disambiguate_llm(const Document& doc, const Mention& mention, std::span<const Candidate> candidates,
                            const JsonClient& client, const LlmParams& params);

}  // namespace lela
