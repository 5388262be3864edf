#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lela/backends.hpp"
#include "lela/kb.hpp"
#include "lela/types.hpp"

namespace lela {

struct Query {
  Mention mention;
  std::string context;  // document window around the mention
};

/// Query for `mention` with up to `window` code points of context on each side.
Query make_query(const Document& doc, const Mention& mention, std::size_t window = 256);

/// Lowercased runs of Unicode alphanumerics. No stemming, no stopwords.
std::vector<std::string> tokenize(std::string_view s);

struct ScoredEntity {
  std::size_t index = 0;  // position in the KB
  double score = 0.0;
};

/// Top-n by score descending, ties by KB order. With `drop_zero`, entities
/// scoring <= 0 are excluded.
std::vector<ScoredEntity> top_n(std::vector<ScoredEntity> scored, std::size_t n, bool drop_zero);

std::vector<Candidate> to_candidates(const KnowledgeBase& kb, const std::vector<ScoredEntity>& ranked);

/// Okapi BM25 over candidate_text of every KB entity with the non-negative
/// IDF ln(1 + (N - n_t + 0.5) / (n_t + 0.5)).
class Bm25Index {
 public:
  struct Posting {
    std::size_t entity = 0;
    std::size_t tf = 0;
  };

  explicit Bm25Index(const KnowledgeBase& kb, double k1 = 1.2, double b = 0.75);

  double score(std::span<const std::string> query_tokens, std::size_t entity) const;
  double idf(const std::string& term) const;
  /// Scores every entity containing at least one query term.
  std::vector<ScoredEntity> score_all(std::span<const std::string> query_tokens) const;

  std::size_t size() const { return doc_len_.size(); }
  double avgdl() const { return avgdl_; }
  double k1() const { return k1_; }
  double b() const { return b_; }
  std::size_t doc_len(std::size_t entity) const { return doc_len_.at(entity); }
  const std::vector<Posting>* postings(const std::string& term) const;

 private:
  double term_weight(double idf, std::size_t tf, std::size_t entity) const;
  std::size_t tf(const std::vector<Posting>& list, std::size_t entity) const;

  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::size_t> doc_len_;
  double avgdl_ = 0.0;
  double k1_;
  double b_;
};

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// 1 - Levenshtein(lower(a), lower(b)) / max(len(a), len(b)), in code points.
/// Two empty strings score 1.
double fuzzy_score(std::string_view a, std::string_view b);

/// L2-normalizes in place; throws MalformedResponse on a zero vector.
void normalize(std::vector<float>& v);

/// POST {base}/v1/embeddings in batches of at most `batch_size`; results are
/// reordered by "index" and L2-normalized.
std::vector<std::vector<float>> embed(const JsonClient& client, const std::vector<std::string>& texts,
                                      std::size_t batch_size = 64);

/// Exact inner-product search over unit vectors.
class DenseIndex {
 public:
  DenseIndex() = default;
  explicit DenseIndex(std::vector<std::vector<float>> vectors);

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> vector(std::size_t i) const;
  std::vector<ScoredEntity> search(std::span<const float> query, std::size_t n) const;

 private:
  std::vector<float> data_;
  std::size_t dim_ = 0;
  std::size_t count_ = 0;
};

double dot(std::span<const float> a, std::span<const float> b);

}  // namespace lela
