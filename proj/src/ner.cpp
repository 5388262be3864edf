#include "lela/ner.hpp"

#include <algorithm>
#include <tuple>

#include "lela/errors.hpp"
#include "lela/parallel.hpp"
#include "lela/utf8.hpp"

namespace lela {

NerParams NerParams::from_json(const json& params) {
  NerParams p;
  if (params.is_null()) return p;
  if (!params.is_object()) throw InvalidParams("ner params must be an object");
  try {
    if (params.contains("labels")) p.labels = params["labels"].get<std::vector<std::string>>();
    if (params.contains("threshold")) p.threshold = params["threshold"].get<double>();
    if (params.contains("patterns")) p.patterns = params["patterns"].get<std::map<std::string, std::string>>();
    if (params.contains("window")) p.window = params["window"].get<std::size_t>();
    if (params.contains("overlap")) p.overlap = params["overlap"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw InvalidParams(std::string("invalid ner params: ") + e.what());
  }
  if (!(p.threshold >= 0.0 && p.threshold <= 1.0)) throw InvalidParams("ner threshold must lie in [0,1]");
  if (p.window <= p.overlap) throw InvalidParams("ner window must exceed overlap");
  return p;
}

// ---- regex ----

RegexRecognizer::RegexRecognizer(const std::map<std::string, std::string>& patterns) {
  for (const auto& [label, pattern] : patterns) {
    try {
      patterns_.emplace_back(label, std::regex(pattern, std::regex::extended));
    } catch (const std::regex_error& e) {
      throw InvalidPattern("pattern for label '" + label + "' does not compile: " + e.what());
    }
  }
}

std::vector<Mention> RegexRecognizer::find(std::string_view text) const {
  std::vector<Mention> out;
  if (text.empty()) return out;
  const std::string owned(text);
  utf8::Index index(owned);
  for (const auto& [label, re] : patterns_) {
    for (auto it = std::sregex_iterator(owned.begin(), owned.end(), re); it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      if (m.length(0) == 0) continue;
      const auto b = static_cast<std::size_t>(m.position(0));
      const auto e = b + static_cast<std::size_t>(m.length(0));
      const std::size_t start = index.cp_offset(b);
      const std::size_t end = index.cp_offset(e);
      // Skip matches that cut through a multi-byte character.
      if (index.byte_offset(start) != b || index.byte_offset(end) != e) continue;
      out.push_back(Mention{start, end, owned.substr(b, e - b), label, 1.0});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Mention& a, const Mention& b) {
    return std::tie(a.start, a.end) < std::tie(b.start, b.end);
  });
  return out;
}

std::vector<Mention> regex_ner(std::string_view text, const RegexRecognizer& recognizer, std::size_t window,
                               std::size_t overlap) {
  std::vector<Mention> all;
  const auto chunks = chunk(text, window, overlap);
  utf8::Index index(text);
  for (const auto& c : chunks) {
    for (const auto& local : recognizer.find(c.text)) all.push_back(remap(c, local, text, index));
  }
  return merge_mentions(std::move(all));
}

std::vector<Mention> regex_ner(std::string_view text, const NerParams& params) {
  return regex_ner(text, RegexRecognizer(params.patterns), params.window, params.overlap);
}

// ---- gazetteer ----

std::vector<std::string> gazetteer_names(const KBEntity& e) {
  std::vector<std::string> names;
  names.push_back(e.label);
  // "Paris (city)" -> "Paris"
  if (!e.label.empty() && e.label.back() == ')') {
    const std::size_t open = e.label.rfind(" (");
    if (open != std::string::npos && open > 0) names.push_back(e.label.substr(0, open));
  }
  return names;
}

Gazetteer::Gazetteer(const KnowledgeBase& kb) {
  for (const auto& e : kb.entities()) {
    for (const auto& name : gazetteer_names(e)) {
      std::u32string lowered = utf8::lower(utf8::decode(name));
      if (lowered.empty()) continue;
      insert(lowered);
    }
  }
}

void Gazetteer::insert(const std::u32string& name) {
  std::size_t node = 0;
  for (char32_t cp : name) {
    auto it = nodes_[node].next.find(cp);
    if (it == nodes_[node].next.end()) {
      nodes_.emplace_back();
      const std::size_t created = nodes_.size() - 1;
      nodes_[node].next.emplace(cp, created);
      node = created;
    } else {
      node = it->second;
    }
  }
  if (!nodes_[node].terminal) ++name_count_;
  nodes_[node].terminal = true;
}

std::vector<Mention> Gazetteer::find(std::string_view text) const {
  std::vector<Mention> out;
  const std::u32string cps = utf8::decode(text);
  const std::u32string lowered = utf8::lower(cps);
  const std::size_t n = cps.size();

  std::size_t i = 0;
  while (i < n) {
    if (i > 0 && utf8::is_alnum(cps[i - 1])) {
      ++i;
      continue;
    }
    std::size_t best_end = 0;
    std::size_t node = 0;
    for (std::size_t j = i; j < n; ++j) {
      auto it = nodes_[node].next.find(lowered[j]);
      if (it == nodes_[node].next.end()) break;
      node = it->second;
      if (nodes_[node].terminal && (j + 1 == n || !utf8::is_alnum(cps[j + 1]))) best_end = j + 1;
    }
    if (best_end > 0) {
      out.push_back(Mention{i, best_end, utf8::encode(std::u32string_view(cps).substr(i, best_end - i)), "entity", 1.0});
      i = best_end;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<Mention> gazetteer_ner(std::string_view text, const KnowledgeBase& kb, const NerParams&) {
  return Gazetteer(kb).find(text);
}

// ---- remote ----

std::vector<Mention> remote_ner(const std::vector<Chunk>& chunks, std::string_view document_text,
                                const NerParams& params, const JsonClient& client) {
  constexpr std::size_t kTextsPerRequest = 8;
  const std::size_t batches = (chunks.size() + kTextsPerRequest - 1) / kTextsPerRequest;
  std::vector<std::vector<Mention>> per_batch(batches);
  const utf8::Index doc_index(document_text);

  parallel_for(batches, client.config().max_in_flight, [&](std::size_t b) {
    const std::size_t begin = b * kTextsPerRequest;
    const std::size_t end = std::min(chunks.size(), begin + kTextsPerRequest);
    json body;
    body["texts"] = json::array();
    for (std::size_t i = begin; i < end; ++i) body["texts"].push_back(chunks[i].text);
    body["labels"] = params.labels;
    body["threshold"] = params.threshold;

    const json resp = client.post("ner", "/ner", body);
    if (!resp.contains("spans") || !resp["spans"].is_array() || resp["spans"].size() != end - begin) {
      throw MalformedResponse("NER response must carry one span list per text");
    }
    for (std::size_t i = begin; i < end; ++i) {
      const auto& list = resp["spans"][i - begin];
      if (!list.is_array()) throw MalformedResponse("NER span list is not an array");
      const Chunk& c = chunks[i];
      const utf8::Index chunk_index(c.text);
      for (const auto& span : list) {
        Mention local;
        try {
          local.start = span.at("start").get<std::size_t>();
          local.end = span.at("end").get<std::size_t>();
          local.label = span.at("label").get<std::string>();
          local.score = span.at("score").get<double>();
        } catch (const json::exception& e) {
          throw MalformedResponse(std::string("malformed NER span: ") + e.what());
        }
        if (!(local.score >= 0.0 && local.score <= 1.0)) throw MalformedResponse("NER score outside [0,1]");
        if (local.score < params.threshold) continue;
        if (local.start >= local.end || local.end > chunk_index.size()) {
          throw SurfaceMismatch("NER span [" + std::to_string(local.start) + "," + std::to_string(local.end) +
                                ") outside chunk " + std::to_string(c.index));
        }
        local.surface = utf8::substr(c.text, chunk_index, local.start, local.end);
        per_batch[b].push_back(remap(c, local, document_text, doc_index));
      }
    }
  });

  std::vector<Mention> all;
  for (auto& v : per_batch) {
    for (auto& m : v) all.push_back(std::move(m));
  }
  return merge_mentions(std::move(all));
}

}  // namespace lela
