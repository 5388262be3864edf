#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lela/backends.hpp"
#include "lela/types.hpp"

namespace lela {

/// Keeps the first min(k, n) candidates and renumbers ranks from 1.
std::vector<Candidate> cutoff(std::vector<Candidate> candidates, std::size_t k);

/// Scores (query, candidate_text) pairs via POST {base}/rerank in batches of at
/// most `batch_size`, then sorts by rerank_score descending with ties broken by
/// the incoming rank. Failures leave the input order untouched and log a warning.
std::vector<Candidate> rerank_remote(const JsonClient& client, const std::string& query,
                                     std::vector<Candidate> candidates, std::size_t batch_size = 32);

}  // namespace lela
