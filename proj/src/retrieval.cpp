#include "lela/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lela/errors.hpp"
#include "lela/utf8.hpp"

namespace lela {

Query make_query(const Document& doc, const Mention& mention, std::size_t window) {
  utf8::Index index(doc.text);
  const std::size_t start = mention.start > window ? mention.start - window : 0;
  const std::size_t end = std::min(index.size(), mention.end + window);
  return Query{mention, utf8::substr(doc.text, index, start, end)};
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t cp : utf8::decode(s)) {
    if (utf8::is_alnum(cp)) {
      utf8::append(current, utf8::to_lower(cp));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<ScoredEntity> top_n(std::vector<ScoredEntity> scored, std::size_t n, bool drop_zero) {
  if (drop_zero) {
    std::erase_if(scored, [](const ScoredEntity& s) { return !(s.score > 0.0); });
  }
  const auto better = [](const ScoredEntity& a, const ScoredEntity& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  if (scored.size() > n) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);
    scored.resize(n);
  } else {
    std::sort(scored.begin(), scored.end(), better);
  }
  return scored;
}

std::vector<Candidate> to_candidates(const KnowledgeBase& kb, const std::vector<ScoredEntity>& ranked) {
  std::vector<Candidate> out;
  out.reserve(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    out.push_back(make_candidate(kb.at(ranked[i].index), ranked[i].score, i + 1));
  }
  return out;
}

// ---- BM25 ----

Bm25Index::Bm25Index(const KnowledgeBase& kb, double k1, double b) : k1_(k1), b_(b) {
  doc_len_.reserve(kb.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < kb.size(); ++i) {
    const auto tokens = tokenize(candidate_text(kb.at(i)));
    doc_len_.push_back(tokens.size());
    total += tokens.size();
    std::map<std::string, std::size_t> counts;
    for (const auto& t : tokens) ++counts[t];
    // Entities are visited in order, so each postings list stays sorted.
    for (auto& [term, count] : counts) postings_[term].push_back(Posting{i, count});
  }
  avgdl_ = kb.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(kb.size());
}

const std::vector<Bm25Index::Posting>* Bm25Index::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

double Bm25Index::idf(const std::string& term) const {
  const auto* list = postings(term);
  const double n_t = list ? static_cast<double>(list->size()) : 0.0;
  const double N = static_cast<double>(doc_len_.size());
  return std::log(1.0 + (N - n_t + 0.5) / (n_t + 0.5));
}

double Bm25Index::term_weight(double idf, std::size_t tf, std::size_t entity) const {
  const double f = static_cast<double>(tf);
  const double dl = static_cast<double>(doc_len_[entity]);
  const double norm = avgdl_ > 0.0 ? dl / avgdl_ : 0.0;
  return idf * f * (k1_ + 1.0) / (f + k1_ * (1.0 - b_ + b_ * norm));
}

std::size_t Bm25Index::tf(const std::vector<Posting>& list, std::size_t entity) const {
  auto it = std::lower_bound(list.begin(), list.end(), entity,
                             [](const Posting& p, std::size_t e) { return p.entity < e; });
  return (it != list.end() && it->entity == entity) ? it->tf : 0;
}

double Bm25Index::score(std::span<const std::string> query_tokens, std::size_t entity) const {
  if (entity >= doc_len_.size()) throw IndexNotBuilt("entity index out of range");
  double total = 0.0;
  for (const auto& term : query_tokens) {
    const auto* list = postings(term);
    if (list == nullptr) continue;
    const std::size_t f = tf(*list, entity);
    if (f == 0) continue;
    total += term_weight(idf(term), f, entity);
  }
  return total;
}

std::vector<ScoredEntity> Bm25Index::score_all(std::span<const std::string> query_tokens) const {
  // Accumulate in query-token order per entity so the summation order matches score().
  std::map<std::size_t, double> acc;
  for (const auto& term : query_tokens) {
    const auto* list = postings(term);
    if (list == nullptr) continue;
    const double w_idf = idf(term);
    for (const auto& p : *list) acc[p.entity] += term_weight(w_idf, p.tf, p.entity);
  }
  std::vector<ScoredEntity> out;
  out.reserve(acc.size());
  for (auto& [entity, s] : acc) out.push_back(ScoredEntity{entity, s});
  return out;
}

// ---- fuzzy ----

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

double fuzzy_score(std::string_view a, std::string_view b) {
  const std::u32string la = utf8::lower(utf8::decode(a));
  const std::u32string lb = utf8::lower(utf8::decode(b));
  const std::size_t longest = std::max(la.size(), lb.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(la, lb)) / static_cast<double>(longest);
}

// ---- dense ----

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

void normalize(std::vector<float>& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw MalformedResponse("cannot normalize a zero or non-finite vector");
  for (float& x : v) x = static_cast<float>(x / norm);
}

std::vector<std::vector<float>> embed(const JsonClient& client, const std::vector<std::string>& texts,
                                      std::size_t batch_size) {
  std::vector<std::vector<float>> out;
  if (texts.empty()) return out;
  if (batch_size == 0) batch_size = 64;
  out.reserve(texts.size());
  std::size_t dim = 0;

  for (std::size_t begin = 0; begin < texts.size(); begin += batch_size) {
    const std::size_t end = std::min(texts.size(), begin + batch_size);
    json body;
    body["model"] = client.config().model;
    body["input"] = json::array();
    for (std::size_t i = begin; i < end; ++i) body["input"].push_back(texts[i]);

    const json resp = client.post("embeddings", "/v1/embeddings", body);
    if (!resp.contains("data") || !resp["data"].is_array()) {
      throw MalformedResponse("embeddings response lacks a data array");
    }
    const std::size_t count = end - begin;
    std::vector<std::vector<float>> batch(count);
    std::vector<bool> seen(count, false);
    std::size_t position = 0;
    for (const auto& item : resp["data"]) {
      std::size_t idx = position++;
      if (item.contains("index") && item["index"].is_number_integer()) idx = item["index"].get<std::size_t>();
      if (idx >= count || seen[idx]) throw MalformedResponse("embedding index out of range or repeated");
      if (!item.contains("embedding") || !item["embedding"].is_array()) {
        throw MalformedResponse("embedding item lacks a vector");
      }
      std::vector<float> v = item["embedding"].get<std::vector<float>>();
      if (v.empty()) throw MalformedResponse("empty embedding vector");
      if (dim == 0) dim = v.size();
      if (v.size() != dim) {
        throw DimMismatch("embedding dimension " + std::to_string(v.size()) + " differs from " + std::to_string(dim));
      }
      normalize(v);
      batch[idx] = std::move(v);
      seen[idx] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw MalformedResponse("embeddings response is missing entries");
    }
    for (auto& v : batch) out.push_back(std::move(v));
  }
  return out;
}

DenseIndex::DenseIndex(std::vector<std::vector<float>> vectors) : count_(vectors.size()) {
  if (vectors.empty()) return;
  dim_ = vectors.front().size();
  data_.reserve(dim_ * count_);
  for (auto& v : vectors) {
    if (v.size() != dim_) throw DimMismatch("dense index vectors differ in dimension");
    normalize(v);
    data_.insert(data_.end(), v.begin(), v.end());
  }
}

std::span<const float> DenseIndex::vector(std::size_t i) const {
  return std::span<const float>(data_).subspan(i * dim_, dim_);
}

std::vector<ScoredEntity> DenseIndex::search(std::span<const float> query, std::size_t n) const {
  if (count_ > 0 && query.size() != dim_) {
    throw DimMismatch("query dimension " + std::to_string(query.size()) + " != index dimension " +
                      std::to_string(dim_));
  }
  std::vector<ScoredEntity> scored;
  scored.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) scored.push_back(ScoredEntity{i, dot(vector(i), query)});
  return top_n(std::move(scored), n, false);
}

}  // namespace lela
