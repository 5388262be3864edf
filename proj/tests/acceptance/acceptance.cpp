// One test per acceptance criterion; main() prints a PASS/FAIL line for each.

#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>
#include <regex>

#include "lela/backends.hpp"
#include "lela/chunking.hpp"
#include "lela/disambiguate.hpp"
#include "lela/errors.hpp"
#include "lela/eval.hpp"
#include "lela/ner.hpp"
#include "lela/output.hpp"
#include "lela/pipeline.hpp"
#include "lela/retrieval.hpp"
#include "support/fixtures.hpp"
#include "support/mock_server.hpp"
#include "support/oracles.hpp"

using namespace lela;

namespace {

// Chat handler that answers with the option number of a scripted label, so the
// answer follows the entity wherever it sits in the prompt.
std::vector<std::string> answer_by_label(const json& req, const std::vector<std::string>& labels) {
  const std::string prompt = req["messages"].back()["content"];
  std::vector<std::string> out;
  for (const auto& want : labels) {
    std::string ans = "no idea";
    if (want == "NIL") {
      const auto pos = prompt.find(". None of the candidates");
      const auto line = prompt.rfind('\n', pos);
      ans = prompt.substr(line + 1, pos - line - 1);
    } else if (!want.empty()) {
      const std::regex opt("\\n(\\d+)\\. " + std::regex_replace(want, std::regex(R"([()\[\].*+?^$|\\])"), R"(\$&)") + "( —|\\n)");
      std::smatch m;
      if (std::regex_search(prompt, m, opt)) ans = m[1];
    }
    out.push_back(ans);
  }
  return out;
}

std::string entity_for_surface(const std::string& surface) {
  if (surface == "France") return "France";
  if (surface == "Paris") return "Paris (city)";
  return "NIL";
}

std::string bracketed_surface(const json& req) {
  const std::string prompt = req["messages"].back()["content"];
  const auto open = prompt.find('[');
  return prompt.substr(open + 1, prompt.find(']', open) - open - 1);
}

}  // namespace

TEST(Acceptance, WorkedExample) {
  fixture::MockServer llm;
  llm.on_chat([](const json& req) {
    return answer_by_label(req, std::vector<std::string>(req["n"].get<std::size_t>(), entity_for_surface(bracketed_surface(req))));
  });
  fixture::TempDir dir;
  dir.write("kb.jsonl", fixture::kIntroKbJsonl);
  BuildOptions opts;
  opts.base_dir = dir.path();

  const auto t0 = std::chrono::steady_clock::now();
  Lela lela(json{{"ner", {{"name", "regex"}, {"params", {{"patterns", {{"entity", "France|Paris|Olympics"}}}}}}},
                 {"candidate_generator", {{"name", "bm25"}}},
                 {"reranker", {{"name", "none"}}},
                 {"disambiguator", {{"name", "llm"}, {"params", {{"base_url", llm.url()}, {"model", "mock"}}}}},
                 {"knowledge_base", {{"name", "jsonl"}, {"params", {{"path", "kb.jsonl"}}}}}},
            opts);
  const auto doc = lela.run_text(fixture::kIntroSentence);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ASSERT_EQ(doc.results.size(), 3u);
  EXPECT_EQ(doc.results[0].mention.surface, "France");
  EXPECT_EQ(doc.results[0].entity_id, "Q142");
  EXPECT_EQ(doc.results[1].mention.surface, "Olympics");
  EXPECT_TRUE(doc.results[1].is_nil());
  EXPECT_EQ(doc.results[2].mention.surface, "Paris");
  EXPECT_EQ(doc.results[2].entity_id, "Q90");
  EXPECT_LT(seconds, 1.0);
  const std::string line = to_output_json(doc).dump();
  EXPECT_NE(line.find("\"surface\":\"Olympics\",\"label\":\"entity\",\"score\":1.0,\"entity_id\":null"), std::string::npos);

  // Olympics against every intro entity: the LLM itself must choose NIL.
  const auto kb = fixture::intro_kb();
  std::vector<Candidate> all;
  for (std::size_t i = 0; i < kb.size(); ++i) all.push_back(make_candidate(kb.at(i), 1.0, i + 1));
  BackendConfig cfg;
  cfg.base_url = llm.url();
  JsonClient client(cfg, nullptr);
  const auto nil = disambiguate_llm(doc.document, doc.results[1].mention, all, client, {});
  EXPECT_TRUE(nil.is_nil());
  EXPECT_FALSE(nil.fallback_used);
}

TEST(Acceptance, Bm25OracleEquivalence) {
  std::mt19937 rng(2024);
  const std::vector<std::string> vocab = {"paris", "france", "city", "novel", "émile", "zola", "capital", "river",
                                          "gall",  "singer", "1897", "europe", "北京",  "war",  "peace", "sea"};
  auto words = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
    return s;
  };
  const auto factory = default_registry().resolve<CandidateGenerator>("bm25");
  for (int k = 0; k < 25; ++k) {
    std::string src;
    const std::size_t n = 1 + rng() % 200;
    for (std::size_t i = 0; i < n; ++i) {
      src += json{{"id", "e" + std::to_string(i)}, {"label", words(1 + rng() % 3)}, {"description", words(rng() % 12)}}.dump() + "\n";
    }
    auto kb = std::make_shared<const KnowledgeBase>(parse_kb(src));
    PipelineConfig config = PipelineConfig::from_json({{"ner", {{"name", "gazetteer"}}}});
    ComponentSpec spec{"bm25", json::object()};
    const auto gen = factory(BuildContext{spec, config, kb, nullptr, "."});
    for (int q = 0; q < 100; ++q) {
      const std::string surface = words(1 + rng() % 3);
      const auto got = gen->generate(Query{Mention{0, 1, surface, "x", 1.0}, surface}, 100);
      auto want = oracle::bm25(*kb, tokenize(surface));
      std::map<std::string, double> exact;
      for (const auto& w : want) exact[kb->at(w.index).id] = w.score;
      if (want.size() > 100) want.resize(100);
      ASSERT_EQ(got.size(), want.size()) << "kb " << k << " query '" << surface << "'";
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_NEAR(got[i].retrieval_score, want[i].score, 1e-9) << "kb " << k << " query '" << surface << "' pos " << i;
        if (got[i].entity_id != kb->at(want[i].index).id) {
          // Exact ties may differ in the last bits; the swapped entity must score the same.
          ASSERT_TRUE(exact.count(got[i].entity_id)) << got[i].entity_id;
          ASSERT_NEAR(exact[got[i].entity_id], want[i].score, 1e-9) << "kb " << k << " query '" << surface << "' pos " << i;
        }
        ASSERT_EQ(got[i].rank, i + 1);
      }
    }
  }
}

TEST(Acceptance, FuzzyOracleEquivalence) {
  std::mt19937 rng(99);
  const std::u32string alphabet = U"abcdeABCÉéñ北 -";
  for (int i = 0; i < 10000; ++i) {
    std::u32string a, b;
    const std::size_t la = rng() % 16, lb = rng() % 16;
    for (std::size_t j = 0; j < la; ++j) a.push_back(alphabet[rng() % alphabet.size()]);
    for (std::size_t j = 0; j < lb; ++j) b.push_back(alphabet[rng() % alphabet.size()]);
    const std::string sa = utf8::encode(a), sb = utf8::encode(b);
    ASSERT_EQ(fuzzy_score(sa, sb), oracle::fuzzy(sa, sb)) << i;
  }
}

TEST(Acceptance, DenseRotationInvariance) {
  std::mt19937 rng(7);
  std::normal_distribution<double> gauss;
  for (int inst = 0; inst < 100; ++inst) {
    const int dim = 2 + static_cast<int>(rng() % 31);
    const int count = 3 + static_cast<int>(rng() % 60);
    Eigen::MatrixXd random(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) random(r, c) = gauss(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(random).householderQ();

    std::vector<std::vector<float>> vecs, rotated;
    auto make = [&](std::vector<float>& v, std::vector<float>& rv) {
      Eigen::VectorXd x(dim);
      for (int d = 0; d < dim; ++d) x(d) = gauss(rng);
      x.normalize();
      const Eigen::VectorXd y = q * x;
      v.assign(x.data(), x.data() + dim);
      rv.assign(y.data(), y.data() + dim);
    };
    for (int i = 0; i < count; ++i) {
      std::vector<float> v, rv;
      make(v, rv);
      vecs.push_back(v);
      rotated.push_back(rv);
    }
    std::vector<float> query, rquery;
    make(query, rquery);

    const DenseIndex a(vecs), b(rotated);
    const auto ra = a.search(query, static_cast<std::size_t>(count));
    const auto rb = b.search(rquery, static_cast<std::size_t>(count));
    ASSERT_EQ(ra.size(), rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      ASSERT_NEAR(ra[i].score, rb[i].score, 1e-6) << "instance " << inst;
      if (ra[i].index != rb[i].index) {
        // Only entities whose scores coincide within tolerance may trade places.
        const double sa = dot(a.vector(ra[i].index), query), sb = dot(a.vector(rb[i].index), query);
        ASSERT_NEAR(sa, sb, 1e-6) << "instance " << inst << " pos " << i;
      }
    }
  }
}

TEST(Acceptance, ChunkingInvariance) {
  std::mt19937 rng(13);
  const std::vector<std::string> words = {"Paris", "France", "Gall", "Émile", "Zola", "北京", "the",  "a",
                                          "hosted", "city", "river", "of", "and", "novel", "Olympics", "\n"};
  const RegexRecognizer recognizer(std::map<std::string, std::string>{{"loc", "Paris|France|北京"}, {"per", "France Gall|Émile Zola"}, {"evt", "Olympics"}});
  std::size_t compared = 0;
  for (int d = 0; d < 100; ++d) {
    std::string text;
    const std::size_t n = 50 + rng() % 1500;
    for (std::size_t i = 0; i < n; ++i) text += words[rng() % words.size()] + (rng() % 7 ? " " : ", ");
    const auto whole = merge_mentions(recognizer.find(text));
    for (auto [window, overlap] : {std::pair<std::size_t, std::size_t>{2000, 200}, {300, 40}, {120, 30}}) {
      const auto chunks = chunk(text, window, overlap);
      ASSERT_TRUE(oracle::chunk_coverage(text, chunks, window)) << d;
      bool all_fit = true;
      for (const auto& m : whole) {
        bool fits = false;
        for (const auto& c : chunks) fits = fits || (m.start >= c.doc_offset && m.end <= c.doc_offset + c.length());
        all_fit = all_fit && fits;
      }
      if (!all_fit) continue;
      ++compared;
      ASSERT_EQ(regex_ner(text, recognizer, window, overlap), whole) << "doc " << d << " window " << window;
    }
  }
  EXPECT_GE(compared, 250u);

  // Coverage grid over random unicode documents.
  const std::u32string alphabet = U"ab cé北\n.";
  for (int d = 0; d < 100; ++d) {
    std::u32string t;
    const std::size_t n = rng() % 5000;
    for (std::size_t i = 0; i < n; ++i) t.push_back(alphabet[rng() % alphabet.size()]);
    const std::string text = utf8::encode(t);
    for (std::size_t window : {16, 64, 500, 2000}) {
      for (std::size_t overlap : {0, 1, 8, 15, 63, 200}) {
        if (overlap >= window) continue;
        ASSERT_TRUE(oracle::chunk_coverage(text, chunk(text, window, overlap), window))
            << "doc " << d << " window " << window << " overlap " << overlap;
      }
    }
  }
}

TEST(Acceptance, SelfConsistency) {
  auto decide = [](std::initializer_list<int> v, std::size_t k) {
    std::vector<Vote> votes;
    for (int x : v) votes.push_back(x > 0 ? Vote::for_candidate(static_cast<std::size_t>(x)) : x == 0 ? Vote::nil() : Vote::invalid());
    return self_consistency(votes, k);
  };
  auto c = decide({2, 2, 3}, 10);
  EXPECT_EQ(c.kind, Consensus::Kind::candidate);
  EXPECT_EQ(c.index, 2u);
  EXPECT_EQ(c.winning_votes * 3, c.valid_votes * 2);
  c = decide({0, 4, -1}, 10);
  EXPECT_EQ(c.kind, Consensus::Kind::candidate);
  EXPECT_EQ(c.index, 4u);
  c = decide({-1, -1, -1}, 10);
  EXPECT_EQ(c.kind, Consensus::Kind::fallback);
  EXPECT_EQ(c.index, 1u);
  c = decide({1, 2, -1}, 10);
  EXPECT_EQ(c.index, 1u);

  // Permutation covariance against a mock that answers by entity, not position.
  fixture::MockServer llm;
  BackendConfig cfg;
  cfg.base_url = llm.url();
  JsonClient client(cfg, nullptr);
  const Document doc{"d", "Somewhere in Paris today.", "inline", Format::text};
  const Mention mention{12, 17, "Paris", "loc", 1.0};
  std::mt19937 rng(31);
  std::size_t checked = 0, ties = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng() % 8;
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < k; ++i) {
      Candidate cand;
      cand.entity_id = "E" + std::to_string(i);
      cand.label = "Entity " + std::to_string(i);
      cand.description = "desc " + std::to_string(i);
      cand.rank = i + 1;
      cands.push_back(cand);
    }
    std::vector<std::string> script;
    std::map<std::string, int> counts;
    int nils = 0;
    for (int s = 0; s < 3; ++s) {
      const auto roll = rng() % (k + 2);
      script.push_back(roll < k ? cands[roll].label : roll == k ? "NIL" : "");
      if (roll < k) ++counts[cands[roll].label];
      if (roll == k) ++nils;
    }
    int top = 0, at_top = 0;
    for (const auto& [l, n] : counts) top = std::max(top, n);
    for (const auto& [l, n] : counts) at_top += n == top ? 1 : 0;

    llm.on_chat([&script](const json& req) { return answer_by_label(req, script); });
    const auto base = disambiguate_llm(doc, mention, cands, client, {});
    std::vector<Candidate> permuted = cands;
    std::shuffle(permuted.begin(), permuted.end(), rng);
    for (std::size_t i = 0; i < permuted.size(); ++i) permuted[i].rank = i + 1;
    const auto moved = disambiguate_llm(doc, mention, permuted, client, {});

    if (counts.empty() && nils == 0) {
      // No valid vote: the rank-1 fallback follows the presented order.
      ++ties;
      EXPECT_TRUE(moved.fallback_used);
      EXPECT_EQ(moved.entity_id, permuted[0].entity_id);
      continue;
    }
    if (at_top > 1) {
      // Candidate ties resolve to the better-ranked option by design.
      ++ties;
      std::size_t best = SIZE_MAX;
      for (std::size_t i = 0; i < permuted.size(); ++i) {
        if (counts.count(permuted[i].label) && counts[permuted[i].label] == top) best = std::min(best, i);
      }
      EXPECT_EQ(moved.entity_id, permuted[best].entity_id);
      continue;
    }
    ++checked;
    ASSERT_EQ(base.status, moved.status) << "trial " << trial;
    ASSERT_EQ(base.entity_id, moved.entity_id) << "trial " << trial;
    ASSERT_DOUBLE_EQ(base.confidence, moved.confidence);
  }
  EXPECT_EQ(checked + ties, 1000u);
  EXPECT_GT(checked, 500u);
}

TEST(Acceptance, MetricCorrectness) {
  auto link = [](std::size_t s, std::size_t e, std::optional<std::string> id) {
    LinkResult r;
    r.mention = Mention{s, e, std::string(e - s, 'x'), "x", 1.0};
    r.status = id ? LinkStatus::linked : LinkStatus::nil;
    if (id) r.entity_id = *id;
    return r;
  };
  const auto fixture = score_inkb({link(0, 2, "A"), link(3, 5, "B"), link(6, 8, "Z")},
                                  GoldAnnotation{"d", {{0, 2, "A"}, {3, 5, "B"}, {6, 8, "C"}, {9, 11, "D"}, {12, 13, std::nullopt}}, {}});
  EXPECT_NEAR(fixture.precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(fixture.recall, 0.5, 1e-12);
  EXPECT_NEAR(fixture.f1, 4.0 / 7.0, 1e-12);

  std::mt19937 rng(5);
  for (int d = 0; d < 200; ++d) {
    GoldAnnotation g{"d" + std::to_string(d), {}, {}};
    std::size_t pos = 0;
    for (std::size_t i = 0, n = rng() % 50; i < n; ++i) {
      pos += rng() % 3;
      const std::size_t len = 1 + rng() % 4;
      g.spans.push_back({pos, pos + len, rng() % 6 ? std::optional<std::string>("Q" + std::to_string(rng() % 5)) : std::nullopt});
      pos += len;
    }
    std::vector<LinkResult> preds;
    for (const auto& s : g.spans) {
      if (rng() % 4 == 0) continue;
      const std::size_t shift = rng() % 8 == 0 ? 1 : 0;
      std::optional<std::string> id = s.entity_id;
      if (rng() % 4 == 0) id = rng() % 3 ? std::optional<std::string>("Q" + std::to_string(rng() % 5)) : std::nullopt;
      preds.push_back(link(s.start + shift, s.end + shift, id));
    }
    const auto got = score_inkb(preds, g);
    const auto want = oracle::score(preds, g);
    ASSERT_EQ(std::tie(got.tp, got.fp, got.fn), std::tie(want.tp, want.fp, want.fn)) << d;
    ASSERT_DOUBLE_EQ(got.f1, want.f1);
  }

  EvalReport a, b;
  a.tp = 2, a.fp = 1, a.fn = 2;
  b.tp = 2, b.fp = 1, b.fn = 0;
  a.finalize();
  b.finalize();
  const auto micro = aggregate({{"a", a}, {"b", b}}, AggregateMode::micro);
  EXPECT_EQ(std::tie(micro.tp, micro.fp, micro.fn), std::make_tuple(std::size_t{4}, std::size_t{2}, std::size_t{2}));
  EXPECT_NEAR(micro.f1, 2.0 / 3.0, 1e-12);
  EvalReport x, y;
  x.f1 = 0.4;
  y.f1 = 0.8;
  EXPECT_NEAR(aggregate({{"x", x}, {"y", y}}, AggregateMode::macro).f1, 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(aggregate({{"a", a}}, AggregateMode::micro).f1, aggregate({{"a", a}}, AggregateMode::macro).f1);

  EXPECT_EQ(bootstrap_ci({a, b, a, b, b}, 1000, 17), bootstrap_ci({a, b, a, b, b}, 1000, 17));
  const auto flat = bootstrap_ci({a, a, a}, 1000, 3);
  EXPECT_EQ(flat.first, flat.second);

  // Two documents with F1 1 and 0: every size-2 resample is AA, AB, BA or BB.
  EvalReport good, bad;
  good.tp = 1;
  bad.fp = 1, bad.fn = 1;
  good.finalize();
  bad.finalize();
  std::map<double, double> exact;
  for (const auto& p : {std::pair{good, good}, {good, bad}, {bad, good}, {bad, bad}}) {
    EvalReport sum;
    sum.tp = p.first.tp + p.second.tp;
    sum.fp = p.first.fp + p.second.fp;
    sum.fn = p.first.fn + p.second.fn;
    sum.finalize();
    exact[sum.f1] += 0.25;
  }
  const auto samples = bootstrap_f1({good, bad}, 20000, 11);
  std::map<double, double> seen;
  for (double s : samples) seen[s] += 1.0 / static_cast<double>(samples.size());
  ASSERT_EQ(seen.size(), exact.size());
  for (const auto& [v, p] : exact) EXPECT_NEAR(seen[v], p, 0.02) << v;
  std::vector<double> dist;
  for (const auto& [v, p] : exact) dist.insert(dist.end(), static_cast<std::size_t>(p * 4000), v);
  const auto ci = bootstrap_ci({good, bad}, 1000, 11);
  EXPECT_DOUBLE_EQ(ci.first, percentile(dist, 0.025));
  EXPECT_DOUBLE_EQ(ci.second, percentile(dist, 0.975));
}

TEST(Acceptance, DeterminismAndCaching) {
  fixture::MockServer mock;
  mock.on_ner([](const std::string& text, const json&) {
    json spans = json::array();
    const auto cps = utf8::decode(text);
    for (const std::u32string w : {U"France", U"Paris", U"Olympics"}) {
      for (auto i = cps.find(w); i != std::u32string::npos; i = cps.find(w, i + 1)) {
        spans.push_back({{"start", i}, {"end", i + w.size()}, {"label", "location"}, {"score", 0.9}});
      }
    }
    return spans;
  });
  mock.on_chat([](const json& req) {
    return answer_by_label(req, std::vector<std::string>(req["n"].get<std::size_t>(), entity_for_surface(bracketed_surface(req))));
  });

  fixture::TempDir dir;
  dir.write("kb.jsonl", fixture::kIntroKbJsonl);
  dir.write("docs/a.txt", fixture::kIntroSentence);
  dir.write("docs/b.txt", "Paris is in France. The Olympics came to Paris.");
  const std::string url = mock.url();
  const std::string config = dir.write(
      "config.json",
      json{{"ner", {{"name", "gliner"}, {"params", {{"labels", {"location"}}, {"base_url", url}}}}},
           {"candidate_generator", {{"name", "openai_api_dense"}, {"params", {{"base_url", url}, {"model", "emb"}}}}},
           {"reranker", {{"name", "llama_server"}, {"params", {{"base_url", url}, {"model", "rr"}}}}},
           {"disambiguator", {{"name", "vllm"}, {"params", {{"base_url", url}, {"model_name", "llm"}}}}},
           {"knowledge_base", {{"name", "jsonl"}, {"params", {{"path", "kb.jsonl"}}}}},
           {"top_k", 3}}
          .dump());
  const std::string base = std::string(LELA_CLI_PATH) + " --config " + config + " --input " + dir.file("docs") +
                           " --cache-dir " + dir.file("cache") + " --no-timings --quiet --output ";
  ASSERT_EQ(std::system((base + dir.file("run1.jsonl")).c_str()), 0);
  const std::size_t first = mock.requests();
  EXPECT_GT(first, 0u);
  EXPECT_GT(mock.requests("/v1/chat/completions"), 0u);
  EXPECT_GT(mock.requests("/v1/embeddings"), 0u);
  EXPECT_GT(mock.requests("/rerank"), 0u);
  EXPECT_GT(mock.requests("/ner"), 0u);
  mock.reset_counters();
  ASSERT_EQ(std::system((base + dir.file("run2.jsonl")).c_str()), 0);
  EXPECT_EQ(mock.requests(), 0u);
  const std::string one = fixture::read_file(dir.file("run1.jsonl"));
  EXPECT_FALSE(one.empty());
  EXPECT_EQ(one, fixture::read_file(dir.file("run2.jsonl")));
  EXPECT_NE(one.find("\"entity_id\":\"Q90\""), std::string::npos);
}

TEST(Acceptance, ConfigFidelity) {
  fixture::TempDir dir;
  dir.write("my_kb.jsonl", fixture::kIntroKbJsonl);
  const json figure1 = json::parse(R"({
    "loader": {"name": "text"},
    "ner": {"name": "gliner", "params": {"labels": ["person", "location"]}},
    "candidate_generator": {"name": "bm25"},
    "reranker": {"name": "llama_server"},
    "disambiguator": {"name": "vllm", "params": {"model_name": "Qwen/Qwen3-4B"}},
    "knowledge_base": {"name": "jsonl", "params": {"path": "my_kb.jsonl"}}
  })");
  const auto config = PipelineConfig::from_json(figure1);
  for (Slot s : kAllSlots) {
    ASSERT_NE(config.spec(s), nullptr) << to_string(s);
    EXPECT_TRUE(default_registry().contains(s, config.spec(s)->name)) << to_string(s);
  }
  BuildOptions opts;
  opts.base_dir = dir.path();
  const auto p = build_pipeline(config, opts);
  ASSERT_NE(p->knowledge_base(), nullptr);
  EXPECT_EQ(p->knowledge_base()->size(), 4u);
  EXPECT_TRUE(p->links());
  EXPECT_TRUE(p->reranks());
  EXPECT_TRUE(p->disambiguates());
  EXPECT_EQ(p->config().n_retrieve, 100u);
  EXPECT_EQ(p->config().top_k, 10u);
  EXPECT_EQ(p->config().n_samples, 3);

  json unknown = figure1;
  unknown["ner"]["name"] = "nonexistent";
  try {
    build_pipeline(PipelineConfig::from_json(unknown), opts);
    ADD_FAILURE() << "unknown component accepted";
  } catch (const UnknownComponent& e) {
    EXPECT_EQ(e.slot(), "ner");
    EXPECT_EQ(e.name(), "nonexistent");
  }
  json depth = figure1;
  depth["n_retrieve"] = 5;
  depth["top_k"] = 10;
  EXPECT_THROW(PipelineConfig::from_json(depth), InvalidParams);
}

TEST(Acceptance, WireProtocolConformance) {
  fixture::MockServer mock;
  BackendConfig cfg;
  cfg.base_url = mock.url() + "/v1";
  cfg.model = "Qwen/Qwen3-4B";
  cfg.backoff_base = std::chrono::milliseconds(1);
  JsonClient client(cfg, nullptr);

  const std::string chat_fixture = fixture::read_file(std::string(LELA_TEST_DATA_DIR) + "/fixtures/openai_chat_n3.json");
  ASSERT_FALSE(chat_fixture.empty());
  mock.enqueue("/v1/chat/completions", 200, chat_fixture);
  const auto three = chat_complete(client, {{"user", "pick"}}, 3, 0.6);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_EQ(three[0], "2");
  EXPECT_EQ(three[1], "The answer is 2.");
  EXPECT_EQ(parse_choice(three[2], 4).index, 2u);
  const auto sent = mock.bodies("/v1/chat/completions").at(0);
  EXPECT_EQ(sent["n"], 3);
  EXPECT_EQ(sent["model"], "Qwen/Qwen3-4B");
  EXPECT_EQ(sent["messages"][0], (json{{"role", "user"}, {"content", "pick"}}));

  mock.reset_counters();
  mock.enqueue("/v1/chat/completions", 500, R"({"error":{"message":"internal","type":"server_error"}})");
  mock.enqueue("/v1/chat/completions", 200, chat_fixture);
  EXPECT_EQ(chat_complete(client, {{"user", "retry"}}, 3, 0.6).size(), 3u);
  EXPECT_EQ(mock.requests("/v1/chat/completions"), 2u);
  EXPECT_EQ(client.stats().retries.load(), 1u);

  mock.reset_counters();
  mock.enqueue("/v1/chat/completions", 401,
               R"({"error":{"message":"Incorrect API key provided","type":"invalid_request_error","code":"invalid_api_key"}})");
  try {
    chat_complete(client, {{"user", "auth"}}, 1, 0.0);
    ADD_FAILURE() << "401 accepted";
  } catch (const ApiError& e) {
    EXPECT_EQ(e.status(), 401);
    EXPECT_NE(e.body().find("invalid_api_key"), std::string::npos);
  }
  EXPECT_EQ(mock.requests("/v1/chat/completions"), 1u);
  EXPECT_EQ(client.stats().retries.load(), 1u);

  mock.reset_counters();
  mock.enqueue("/v1/embeddings", 200, fixture::read_file(std::string(LELA_TEST_DATA_DIR) + "/fixtures/openai_embeddings.json"));
  const auto pair = embed(client, {"first", "second"});
  ASSERT_EQ(pair.size(), 2u);
  EXPECT_NEAR(pair[0][0], 0.6f, 1e-6);
  EXPECT_NEAR(pair[1][1], 1.0f, 1e-6);

  mock.reset_counters();
  mock.on_embed([](const std::string& t) { return std::vector<double>{1.0, std::stod(t)}; });
  std::vector<std::string> texts;
  for (int i = 0; i < 130; ++i) texts.push_back(std::to_string(i));
  const auto vecs = embed(client, texts);
  EXPECT_EQ(mock.requests("/v1/embeddings"), 3u);
  const auto bodies = mock.bodies("/v1/embeddings");
  ASSERT_EQ(bodies.size(), 3u);
  EXPECT_EQ(bodies[0]["input"].size(), 64u);
  EXPECT_EQ(bodies[1]["input"].size(), 64u);
  EXPECT_EQ(bodies[2]["input"].size(), 2u);
  ASSERT_EQ(vecs.size(), 130u);
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    const double norm = std::sqrt(1.0 + static_cast<double>(i * i));
    ASSERT_NEAR(vecs[i][1], static_cast<double>(i) / norm, 1e-6) << i;
  }
}

namespace {

class CriterionPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestPartResult(const ::testing::TestPartResult& r) override {
    if (r.failed()) std::cout << "  " << (r.file_name() ? r.file_name() : "?") << ":" << r.line_number() << ": " << r.summary() << std::endl;
  }
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const auto* r = info.result();
    std::cout << (r->Passed() ? "PASS " : "FAIL ") << info.name() << " (" << r->elapsed_time() << " ms)" << std::endl;
  }
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  spdlog::set_level(spdlog::level::err);
  auto& listeners = ::testing::UnitTest::GetInstance()->listeners();
  delete listeners.Release(listeners.default_result_printer());
  listeners.Append(new CriterionPrinter);
  const int rc = RUN_ALL_TESTS();
  const auto* unit = ::testing::UnitTest::GetInstance();
  std::cout << unit->successful_test_count() << "/" << unit->total_test_count() << " criteria passed" << std::endl;
  return rc;
}
