#pragma once

// Brute-force reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lela/chunking.hpp"
#include "lela/eval.hpp"
#include "lela/kb.hpp"
#include "lela/ner.hpp"
#include "lela/retrieval.hpp"
#include "lela/types.hpp"
#include "lela/utf8.hpp"

namespace lela::oracle {

struct Ranked {
  std::size_t index;
  double score;
};

/// Scores every entity with the textbook formula, no postings.
inline std::vector<Ranked> bm25(const KnowledgeBase& kb, const std::vector<std::string>& query, double k1 = 1.2,
                                double b = 0.75) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& e : kb.entities()) docs.push_back(tokenize(candidate_text(e)));
  const double N = static_cast<double>(docs.size());
  double total = 0;
  for (const auto& d : docs) total += static_cast<double>(d.size());
  const double avgdl = N > 0 ? total / N : 0.0;

  std::vector<Ranked> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double s = 0.0;
    for (const auto& t : query) {
      double n_t = 0;
      for (const auto& d : docs) n_t += std::find(d.begin(), d.end(), t) != d.end() ? 1 : 0;
      const double f = static_cast<double>(std::count(docs[i].begin(), docs[i].end(), t));
      if (f == 0) continue;
      const double idf = std::log(1.0 + (N - n_t + 0.5) / (n_t + 0.5));
      const double dl = static_cast<double>(docs[i].size());
      s += idf * f * (k1 + 1.0) / (f + k1 * (1.0 - b + b * dl / avgdl));
    }
    if (s > 0) out.push_back({i, s});
  }
  std::stable_sort(out.begin(), out.end(), [](const Ranked& x, const Ranked& y) { return x.score > y.score; });
  return out;
}

/// Full-matrix edit distance.
inline std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

inline double fuzzy(const std::string& a, const std::string& b) {
  const auto la = utf8::decode(utf8::lower(a));
  const auto lb = utf8::decode(utf8::lower(b));
  const std::size_t m = std::max(la.size(), lb.size());
  if (m == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(la, lb)) / static_cast<double>(m);
}

/// Greedy selection over every candidate, checking overlap against all accepted spans.
inline std::vector<Mention> merge(const std::vector<Mention>& in) {
  std::map<std::tuple<std::size_t, std::size_t, std::string>, Mention> unique;
  for (const auto& m : in) {
    auto key = std::make_tuple(m.start, m.end, m.label);
    auto it = unique.find(key);
    if (it == unique.end() || it->second.score < m.score) unique[key] = m;
  }
  std::vector<Mention> pool;
  for (auto& [k, m] : unique) pool.push_back(m);
  std::sort(pool.begin(), pool.end(), [](const Mention& a, const Mention& b) {
    const auto la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.score != b.score) return a.score > b.score;
    if (a.start != b.start) return a.start < b.start;
    return a.label < b.label;
  });
  std::vector<Mention> kept;
  for (const auto& m : pool) {
    bool clash = false;
    for (const auto& k : kept) clash = clash || (m.start < k.end && k.start < m.end);
    if (!clash) kept.push_back(m);
  }
  std::sort(kept.begin(), kept.end(), [](const Mention& a, const Mention& b) { return a.start < b.start; });
  return kept;
}

/// Every code point index is covered by some chunk, and each chunk text is the document slice at its offset.
inline bool chunk_coverage(const std::string& text, const std::vector<Chunk>& chunks, std::size_t window) {
  const auto cps = utf8::decode(text);
  std::vector<bool> covered(cps.size(), false);
  for (const auto& c : chunks) {
    const auto ccp = utf8::decode(c.text);
    if (ccp.size() > window || ccp.empty()) return false;
    if (c.doc_offset + ccp.size() > cps.size()) return false;
    for (std::size_t i = 0; i < ccp.size(); ++i) {
      if (cps[c.doc_offset + i] != ccp[i]) return false;
      covered[c.doc_offset + i] = true;
    }
  }
  return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
}

/// All-pairs InKB matcher.
inline EvalReport score(const std::vector<LinkResult>& preds, const GoldAnnotation& gold) {
  std::vector<const GoldSpan*> inkb;
  for (const auto& g : gold.spans) {
    if (g.entity_id) inkb.push_back(&g);
  }
  std::vector<bool> used(inkb.size(), false);
  EvalReport r;
  for (const auto& p : preds) {
    if (p.status != LinkStatus::linked) continue;
    bool hit = false;
    for (std::size_t j = 0; j < inkb.size() && !hit; ++j) {
      if (!used[j] && inkb[j]->start == p.mention.start && inkb[j]->end == p.mention.end &&
          *inkb[j]->entity_id == p.entity_id) {
        used[j] = true;
        hit = true;
      }
    }
    hit ? ++r.tp : ++r.fp;
  }
  r.fn = inkb.size() - r.tp;
  const double tp = static_cast<double>(r.tp), fp = static_cast<double>(r.fp), fn = static_cast<double>(r.fn);
  if (r.tp + r.fp == 0) {
    r.precision = r.fn == 0 ? 1.0 : 0.0;
  } else {
    r.precision = tp / (tp + fp);
  }
  if (r.tp + r.fn == 0) {
    r.recall = r.fp == 0 ? 1.0 : 0.0;
  } else {
    r.recall = tp / (tp + fn);
  }
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

/// Plain substring scan for every label variant, longest at each position, whole words only.
inline std::vector<Mention> gazetteer(const std::string& text, const KnowledgeBase& kb) {
  const auto t = utf8::decode(text);
  std::u32string lt;
  for (char32_t c : t) lt.push_back(utf8::to_lower(c));
  std::vector<std::u32string> names;
  for (const auto& e : kb.entities()) {
    for (const auto& n : gazetteer_names(e)) names.push_back(utf8::decode(utf8::lower(n)));
  }
  std::vector<Mention> out;
  std::size_t i = 0;
  while (i < lt.size()) {
    std::size_t best = 0;
    if (i == 0 || !utf8::is_alnum(lt[i - 1])) {
      for (const auto& n : names) {
        if (n.empty() || i + n.size() > lt.size()) continue;
        if (lt.compare(i, n.size(), n) != 0) continue;
        const std::size_t e = i + n.size();
        if (e < lt.size() && utf8::is_alnum(lt[e])) continue;
        best = std::max(best, n.size());
      }
    }
    if (best > 0) {
      out.push_back(Mention{i, i + best, utf8::encode(t.substr(i, best)), "entity", 1.0});
      i += best;
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace lela::oracle
