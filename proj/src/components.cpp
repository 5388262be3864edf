// Built-in components and their registry entries.

#include <spdlog/spdlog.h>

#include "lela/chunking.hpp"
#include "lela/disambiguate.hpp"
#include "lela/errors.hpp"
#include "lela/ner.hpp"
#include "lela/registry.hpp"
#include "lela/rerank.hpp"

namespace lela {
namespace {

template <typename T>
T param(const json& params, const char* key, T fallback) {
  auto it = params.find(key);
  if (it == params.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InvalidParams(std::string("parameter '") + key + "' has the wrong type");
  }
}

std::shared_ptr<const JsonClient> make_client(const BuildContext& ctx, std::string_view default_url) {
  json params = ctx.params();
  if (!params.contains("base_url")) params["base_url"] = default_url;
  return std::make_shared<const JsonClient>(BackendConfig::from_params(params), ctx.cache);
}

const KnowledgeBase& require_kb(const BuildContext& ctx) {
  if (!ctx.kb) {
    throw InvalidParams("component '" + ctx.spec.name + "' needs a knowledge_base");
  }
  return *ctx.kb;
}

// ---- loaders ----

class FileLoader final : public Loader {
 public:
  FileLoader(std::optional<Format> format, LoadOptions options) : format_(format), options_(std::move(options)) {}

  std::vector<Document> load(const RawInput& input) const override {
    RawInput in = input;
    if (format_) {
      // Binary formats stay rejected whatever the configured loader is.
      if (in.path && has_known_extension(*in.path)) detect_format(*in.path);
      if (!in.declared_format) in.declared_format = format_;
    }
    return lela::load(in, options_);
  }

 private:
  std::optional<Format> format_;
  LoadOptions options_;
};

Factory<Loader> loader_factory(std::optional<Format> format) {
  return [format](const BuildContext& ctx) -> std::shared_ptr<const Loader> {
    LoadOptions options;
    options.json_text_field = param<std::string>(ctx.params(), "text_field", "text");
    return std::make_shared<FileLoader>(format, options);
  };
}

Factory<Loader> rejected_loader(std::string format) {
  return [format](const BuildContext&) -> std::shared_ptr<const Loader> { throw UnsupportedFormat(format); };
}

// ---- recognizers ----

class RegexNer final : public Recognizer {
 public:
  explicit RegexNer(const NerParams& p) : recognizer_(p.patterns), window_(p.window), overlap_(p.overlap) {}
  std::vector<Mention> detect(const Document& doc) const override {
    return regex_ner(doc.text, recognizer_, window_, overlap_);
  }

 private:
  RegexRecognizer recognizer_;
  std::size_t window_;
  std::size_t overlap_;
};

class GazetteerNer final : public Recognizer {
 public:
  explicit GazetteerNer(const KnowledgeBase& kb) : gazetteer_(kb) {}
  std::vector<Mention> detect(const Document& doc) const override { return gazetteer_.find(doc.text); }

 private:
  Gazetteer gazetteer_;
};

class RemoteNer final : public Recognizer {
 public:
  RemoteNer(NerParams p, std::shared_ptr<const JsonClient> client) : params_(std::move(p)), client_(std::move(client)) {}
  std::vector<Mention> detect(const Document& doc) const override {
    return remote_ner(chunk(doc.text, params_.window, params_.overlap), doc.text, params_, *client_);
  }

 private:
  NerParams params_;
  std::shared_ptr<const JsonClient> client_;
};

std::shared_ptr<const Recognizer> build_remote_ner(const BuildContext& ctx) {
  NerParams p = NerParams::from_json(ctx.params());
  if (p.labels.empty()) throw InvalidParams("zero-shot NER needs a non-empty 'labels' list");
  return std::make_shared<RemoteNer>(std::move(p), make_client(ctx, "http://localhost:8080"));
}

// ---- candidate generators ----

class Bm25Generator final : public CandidateGenerator {
 public:
  Bm25Generator(std::shared_ptr<const KnowledgeBase> kb, double k1, double b)
      : kb_(std::move(kb)), index_(*kb_, k1, b) {}
  std::vector<Candidate> generate(const Query& q, std::size_t n) const override {
    const auto tokens = tokenize(q.mention.surface);
    return to_candidates(*kb_, top_n(index_.score_all(tokens), n, true));
  }

 private:
  std::shared_ptr<const KnowledgeBase> kb_;
  Bm25Index index_;
};

class FuzzyGenerator final : public CandidateGenerator {
 public:
  explicit FuzzyGenerator(std::shared_ptr<const KnowledgeBase> kb) : kb_(std::move(kb)) {}
  std::vector<Candidate> generate(const Query& q, std::size_t n) const override {
    std::vector<ScoredEntity> scored;
    scored.reserve(kb_->size());
    for (std::size_t i = 0; i < kb_->size(); ++i) {
      scored.push_back(ScoredEntity{i, fuzzy_score(q.mention.surface, kb_->at(i).label)});
    }
    return to_candidates(*kb_, top_n(std::move(scored), n, true));
  }

 private:
  std::shared_ptr<const KnowledgeBase> kb_;
};

class DenseGenerator final : public CandidateGenerator {
 public:
  DenseGenerator(std::shared_ptr<const KnowledgeBase> kb, std::shared_ptr<const JsonClient> client,
                 std::size_t batch_size)
      : kb_(std::move(kb)), client_(std::move(client)), batch_size_(batch_size) {
    std::vector<std::string> texts;
    texts.reserve(kb_->size());
    for (const auto& e : kb_->entities()) texts.push_back(candidate_text(e));
    index_ = DenseIndex(embed(*client_, texts, batch_size_));
  }
  std::vector<Candidate> generate(const Query& q, std::size_t n) const override {
    if (kb_->empty()) return {};
    const auto vecs = embed(*client_, {q.mention.surface}, batch_size_);
    return to_candidates(*kb_, index_.search(vecs.front(), n));
  }

 private:
  std::shared_ptr<const KnowledgeBase> kb_;
  std::shared_ptr<const JsonClient> client_;
  std::size_t batch_size_;
  DenseIndex index_;
};

// ---- rerankers ----

class RemoteReranker final : public Reranker {
 public:
  RemoteReranker(std::shared_ptr<const JsonClient> client, std::size_t ctx_window, std::size_t batch_size)
      : client_(std::move(client)), ctx_window_(ctx_window), batch_size_(batch_size) {}
  std::vector<Candidate> rerank(const Document& doc, const Mention& mention,
                                std::vector<Candidate> candidates) const override {
    return rerank_remote(*client_, bracketed_context(doc, mention, ctx_window_), std::move(candidates), batch_size_);
  }

 private:
  std::shared_ptr<const JsonClient> client_;
  std::size_t ctx_window_;
  std::size_t batch_size_;
};

// ---- disambiguators ----

class FirstDisambiguator final : public Disambiguator {
 public:
  LinkResult disambiguate(const Document&, const Mention& mention,
                          std::span<const Candidate> candidates) const override {
    return disambiguate_first(mention, candidates);
  }
};

class LlmDisambiguator final : public Disambiguator {
 public:
  LlmDisambiguator(std::shared_ptr<const JsonClient> client, LlmParams params)
      : client_(std::move(client)), params_(std::move(params)) {}
  LinkResult disambiguate(const Document& doc, const Mention& mention,
                          std::span<const Candidate> candidates) const override {
    return disambiguate_llm(doc, mention, candidates, *client_, params_);
  }

 private:
  std::shared_ptr<const JsonClient> client_;
  LlmParams params_;
};

std::shared_ptr<const Disambiguator> build_llm(const BuildContext& ctx) {
  LlmParams p;
  p.n_samples = ctx.config.n_samples;
  if (ctx.params().contains("temperature")) p.temperature = param<double>(ctx.params(), "temperature", 0.0);
  if (p.temperature && *p.temperature < 0.0) throw InvalidParams("temperature must be >= 0");
  p.ctx_window = param<std::size_t>(ctx.params(), "ctx_window", kDefaultContextWindow);
  p.system_prompt = param<std::string>(ctx.params(), "system_prompt", "");
  return std::make_shared<LlmDisambiguator>(make_client(ctx, "http://localhost:8000"), std::move(p));
}

std::shared_ptr<const Reranker> build_remote_reranker(const BuildContext& ctx) {
  return std::make_shared<RemoteReranker>(make_client(ctx, "http://localhost:8000"),
                                          param<std::size_t>(ctx.params(), "ctx_window", kDefaultContextWindow),
                                          param<std::size_t>(ctx.params(), "batch_size", 32));
}

std::shared_ptr<const CandidateGenerator> build_dense(const BuildContext& ctx) {
  require_kb(ctx);
  return std::make_shared<DenseGenerator>(ctx.kb, make_client(ctx, "http://localhost:8000"),
                                          param<std::size_t>(ctx.params(), "batch_size", 64));
}

}  // namespace

void register_builtins(Registry& r) {
  r.add<Loader>("auto", loader_factory(std::nullopt));
  r.add<Loader>("text", loader_factory(Format::text));
  r.add<Loader>("markdown", loader_factory(Format::markdown));
  r.add<Loader>("html", loader_factory(Format::html));
  r.add<Loader>("json", loader_factory(Format::json));
  r.add<Loader>("jsonl", loader_factory(Format::jsonl));
  r.add<Loader>("pdf", rejected_loader("pdf"));
  r.add<Loader>("docx", rejected_loader("docx"));

  r.add<Recognizer>("regex", [](const BuildContext& ctx) -> std::shared_ptr<const Recognizer> {
    NerParams p = NerParams::from_json(ctx.params());
    if (p.patterns.empty()) throw InvalidParams("regex NER needs a non-empty 'patterns' map");
    return std::make_shared<RegexNer>(p);
  });
  r.add<Recognizer>("gazetteer", [](const BuildContext& ctx) -> std::shared_ptr<const Recognizer> {
    return std::make_shared<GazetteerNer>(require_kb(ctx));
  });
  r.add<Recognizer>("remote", build_remote_ner);
  r.add<Recognizer>("gliner", build_remote_ner);

  r.add<CandidateGenerator>("bm25", [](const BuildContext& ctx) -> std::shared_ptr<const CandidateGenerator> {
    require_kb(ctx);
    return std::make_shared<Bm25Generator>(ctx.kb, param<double>(ctx.params(), "k1", 1.2),
                                           param<double>(ctx.params(), "b", 0.75));
  });
  r.add<CandidateGenerator>("fuzzy", [](const BuildContext& ctx) -> std::shared_ptr<const CandidateGenerator> {
    require_kb(ctx);
    return std::make_shared<FuzzyGenerator>(ctx.kb);
  });
  r.add<CandidateGenerator>("dense", build_dense);
  r.add<CandidateGenerator>("openai_api_dense", build_dense);
  r.add<CandidateGenerator>("none", [](const BuildContext&) -> std::shared_ptr<const CandidateGenerator> {
    return nullptr;
  });

  r.add<Reranker>("none", [](const BuildContext&) -> std::shared_ptr<const Reranker> { return nullptr; });
  r.add<Reranker>("remote", build_remote_reranker);
  r.add<Reranker>("llama_server", build_remote_reranker);
  r.add<Reranker>("openai_api", build_remote_reranker);

  r.add<Disambiguator>("first", [](const BuildContext&) -> std::shared_ptr<const Disambiguator> {
    return std::make_shared<FirstDisambiguator>();
  });
  r.add<Disambiguator>("llm", build_llm);
  r.add<Disambiguator>("openai_api", build_llm);
  r.add<Disambiguator>("vllm", build_llm);
  r.add<Disambiguator>("none", [](const BuildContext&) -> std::shared_ptr<const Disambiguator> { return nullptr; });

  r.add<KnowledgeBase>("jsonl", [](const BuildContext& ctx) -> std::shared_ptr<const KnowledgeBase> {
    const std::string path = param<std::string>(ctx.params(), "path", "");
    if (path.empty()) throw InvalidParams("jsonl knowledge_base needs a 'path'");
    std::filesystem::path p(path);
    if (p.is_relative()) p = ctx.base_dir / p;
    return std::make_shared<const KnowledgeBase>(load_kb(p.string()));
  });
}

}  // namespace lela
