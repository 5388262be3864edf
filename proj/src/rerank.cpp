#include "lela/rerank.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "lela/errors.hpp"
#include "lela/kb.hpp"

namespace lela {

std::vector<Candidate> cutoff(std::vector<Candidate> candidates, std::size_t k) {
  if (candidates.size() > k) candidates.resize(k);
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].rank = i + 1;
  return candidates;
}

std::vector<Candidate> rerank_remote(const JsonClient& client, const std::string& query,
                                     std::vector<Candidate> candidates, std::size_t batch_size) {
  if (candidates.empty()) return candidates;
  if (batch_size == 0) batch_size = 32;

  std::vector<double> scores;
  scores.reserve(candidates.size());
  try {
    for (std::size_t begin = 0; begin < candidates.size(); begin += batch_size) {
      const std::size_t end = std::min(candidates.size(), begin + batch_size);
      json body;
      body["model"] = client.config().model;
      body["query"] = query;
      body["documents"] = json::array();
      for (std::size_t i = begin; i < end; ++i) {
        const auto& c = candidates[i];
        body["documents"].push_back(candidate_text(KBEntity{c.entity_id, c.label, c.description, {}}));
      }
      const json resp = client.post("rerank", "/rerank", body);
      if (!resp.contains("scores") || !resp["scores"].is_array() || resp["scores"].size() != end - begin) {
        throw MalformedResponse("rerank response must carry one score per document");
      }
      for (const auto& s : resp["scores"]) {
        if (!s.is_number()) throw MalformedResponse("rerank score is not a number");
        scores.push_back(s.get<double>());
      }
    }
  } catch (const Error& e) {
    spdlog::warn("reranking failed, keeping retrieval order: {}", e.what());
    return candidates;
  }

  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].rerank_score = scores[i];
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (*a.rerank_score != *b.rerank_score) return *a.rerank_score > *b.rerank_score;
    return a.rank < b.rank;
  });
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].rank = i + 1;
  return candidates;
}

}  // namespace lela
