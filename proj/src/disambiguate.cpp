#include "lela/disambiguate.hpp"

#include <algorithm>
#include <cctype>

#include <spdlog/spdlog.h>

#include "lela/errors.hpp"
#include "lela/utf8.hpp"

namespace lela {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string neutralize_brackets(std::string s) {
  std::replace(s.begin(), s.end(), '[', '(');
  std::replace(s.begin(), s.end(), ']', ')');
  return s;
}

std::string_view strip_reasoning(std::string_view s) {
  const std::size_t close = s.rfind("</think>");
  if (close != std::string_view::npos) return s.substr(close + 8);
  const std::size_t open = s.find("<think>");
  if (open != std::string_view::npos) return s.substr(0, open);
  return s;
}

}  // namespace

std::string bracketed_context(const Document& doc, const Mention& mention, std::size_t window) {
  utf8::Index index(doc.text);
  const std::size_t start = mention.start > window ? mention.start - window : 0;
  const std::size_t end = std::min(index.size(), mention.end + window);
  std::string out = neutralize_brackets(utf8::substr(doc.text, index, start, mention.start));
  out += '[';
  out += neutralize_brackets(utf8::substr(doc.text, index, mention.start, mention.end));
  out += ']';
  out += neutralize_brackets(utf8::substr(doc.text, index, mention.end, end));
  return out;
}

PromptSpec build_prompt(const Document& doc, const Mention& mention, std::span<const Candidate> candidates,
                        std::size_t ctx_window) {
  PromptSpec spec;
  spec.context = bracketed_context(doc, mention, ctx_window);
  spec.mention_surface = mention.surface;
  spec.options.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    spec.options.push_back(PromptOption{i + 1, candidates[i].label, candidates[i].description});
  }
  spec.nil_index = candidates.size() + 1;
  return spec;
}

std::string PromptSpec::render() const {
  std::string options_text;
  for (const auto& o : options) {
    options_text += std::to_string(o.index) + ". " + o.label;
    if (!o.description.empty()) options_text += " — " + o.description;
    options_text += '\n';
  }
  options_text += std::to_string(nil_index) + ". None of the candidates";

  std::string out(kPromptTemplate);
  // {options} goes last so candidate text containing placeholders stays literal.
  replace_all(out, "{context}", "\x01");
  replace_all(out, "{mention}", "\x02");
  replace_all(out, "{nil_index}", std::to_string(nil_index));
  replace_all(out, "{options}", "\x03");
  replace_all(out, "\x01", context);
  replace_all(out, "\x02", mention_surface);
  replace_all(out, "\x03", options_text);
  return out;
}

Vote parse_choice(std::string_view completion, std::size_t k) {
  Vote vote;
  vote.raw = std::string(completion);
  const std::string_view body = strip_reasoning(completion);

  for (std::size_t i = 0; i < body.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(body[i]))) continue;
    std::size_t j = i;
    while (j < body.size() && std::isdigit(static_cast<unsigned char>(body[j]))) ++j;
    const bool negative = i > 0 && body[i - 1] == '-';
    const std::string_view digits = body.substr(i, j - i);
    if (negative || digits.size() > 18) return vote;
    const std::size_t value = std::stoull(std::string(digits));
    if (value >= 1 && value <= k) {
      vote.kind = Vote::Kind::candidate;
      vote.index = value;
    } else if (value == k + 1) {
      vote.kind = Vote::Kind::nil;
    }
    return vote;
  }
  return vote;
}

Consensus self_consistency(std::span<const Vote> votes, std::size_t k) {
  Consensus c;
  c.candidate_counts.assign(k, 0);
  for (const auto& v : votes) {
    if (v.kind == Vote::Kind::candidate && v.index >= 1 && v.index <= k) {
      ++c.candidate_counts[v.index - 1];
      ++c.valid_votes;
    } else if (v.kind == Vote::Kind::nil) {
      ++c.nil_count;
      ++c.valid_votes;
    }
  }

  if (c.valid_votes == 0) {
    if (k == 0) {
      c.kind = Consensus::Kind::nil;
    } else {
      c.kind = Consensus::Kind::fallback;
      c.index = 1;
    }
    return c;
  }

  std::size_t best = 0;
  int best_count = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (c.candidate_counts[i] > best_count) {
      best = i + 1;
      best_count = c.candidate_counts[i];
    }
  }
  if (best != 0 && best_count >= c.nil_count) {
    c.kind = Consensus::Kind::candidate;
    c.index = best;
    c.winning_votes = best_count;
  } else {
    c.kind = Consensus::Kind::nil;
    c.winning_votes = c.nil_count;
  }
  return c;
}

LinkResult make_link_result(const Mention& mention, std::span<const Candidate> candidates, const Consensus& c) {
  LinkResult r;
  r.mention = mention;
  r.candidates.assign(candidates.begin(), candidates.end());
  for (std::size_t i = 0; i < c.candidate_counts.size() && i < candidates.size(); ++i) {
    if (c.candidate_counts[i] > 0) r.votes.push_back(VoteCount{candidates[i].entity_id, c.candidate_counts[i]});
  }
  if (c.nil_count > 0) r.votes.push_back(VoteCount{std::nullopt, c.nil_count});

  switch (c.kind) {
    case Consensus::Kind::candidate:
      r.status = LinkStatus::linked;
      r.entity_id = candidates[c.index - 1].entity_id;
      r.confidence = static_cast<double>(c.winning_votes) / c.valid_votes;
      break;
    case Consensus::Kind::nil:
      r.status = LinkStatus::nil;
      r.confidence = c.valid_votes > 0 ? static_cast<double>(c.winning_votes) / c.valid_votes : 1.0;
      break;
    case Consensus::Kind::fallback:
      r.status = LinkStatus::linked;
      r.entity_id = candidates[c.index - 1].entity_id;
      r.confidence = 0.0;
      r.fallback_used = true;
      break;
  }
  return r;
}

LinkResult disambiguate_first(const Mention& mention, std::span<const Candidate> candidates) {
  LinkResult r;
  r.mention = mention;
  r.candidates.assign(candidates.begin(), candidates.end());
  r.confidence = 1.0;
  if (candidates.empty()) {
    r.status = LinkStatus::nil;
  } else {
    r.status = LinkStatus::linked;
    r.entity_id = candidates.front().entity_id;
  }
  return r;
}

LinkResult disambiguate_llm(const Document& doc, const Mention& mention, std::span<const Candidate> candidates,
                            const JsonClient& client, const LlmParams& params) {
  if (candidates.empty()) {
    // Only the NIL option would be offered; no request needed.
    LinkResult r;
    r.mention = mention;
    r.status = LinkStatus::nil;
    r.confidence = 1.0;
    return r;
  }

  const PromptSpec prompt = build_prompt(doc, mention, candidates, params.ctx_window);
  std::vector<ChatMessage> messages;
  if (!params.system_prompt.empty()) messages.push_back({"system", params.system_prompt});
  messages.push_back({"user", prompt.render()});

  std::vector<std::string> completions;
  try {
    completions = chat_complete(client, messages, params.n_samples, params.effective_temperature());
  } catch (const Error& e) {
    spdlog::warn("disambiguation of '{}' at {} fell back to retrieval rank: {}", mention.surface, mention.start,
                 e.what());
    LinkResult r = disambiguate_first(mention, candidates);
    r.fallback_used = true;
    r.confidence = 0.0;
    return r;
  }

  std::vector<Vote> votes;
  votes.reserve(static_cast<std::size_t>(params.n_samples));
  for (const auto& text : completions) {
    if (votes.size() == static_cast<std::size_t>(params.n_samples)) break;
    votes.push_back(parse_choice(text, candidates.size()));
  }
  while (votes.size() < static_cast<std::size_t>(params.n_samples)) votes.push_back(Vote::invalid());

  return make_link_result(mention, candidates, self_consistency(votes, candidates.size()));
}

}  // namespace lela
