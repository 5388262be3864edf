#include "lela/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include <spdlog/spdlog.h>

#include "lela/chunking.hpp"
#include "lela/disambiguate.hpp"
#include "lela/errors.hpp"
#include "lela/parallel.hpp"
#include "lela/rerank.hpp"
#include "lela/utf8.hpp"

namespace lela {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string describe(const Mention& m) {
  return "mention '" + m.surface + "' [" + std::to_string(m.start) + "," + std::to_string(m.end) + ")";
}

bool is_backend_error(const std::exception& e) {
  return dynamic_cast<const TransportError*>(&e) != nullptr || dynamic_cast<const ApiError*>(&e) != nullptr ||
         dynamic_cast<const MalformedResponse*>(&e) != nullptr || dynamic_cast<const DimMismatch*>(&e) != nullptr;
}

[[noreturn]] void rethrow_in_stage(Stage stage, const std::string& context) {
  try {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(to_string(stage)), context, e.what(), is_backend_error(e));
  }
}

template <typename T>
std::shared_ptr<const T> construct(const Registry& registry, const ComponentSpec& spec, const BuildContext& ctx) {
  const Factory<T> factory = registry.resolve<T>(spec.name);
  return factory(ctx);
}

}  // namespace

std::shared_ptr<const Pipeline> build_pipeline(const PipelineConfig& config, const BuildOptions& options,
                                               const Registry& registry) {
  config.validate();

  // Resolve every name before constructing anything so a typo fails fast.
  for (Slot s : kAllSlots) {
    if (const ComponentSpec* spec = config.spec(s); spec && !registry.contains(s, spec->name)) {
      throw UnknownComponent(std::string(to_string(s)), spec->name);
    }
  }

  std::shared_ptr<Pipeline> p(new Pipeline());
  p->config_ = config;
  p->options_ = options;

  const auto ctx = [&](const ComponentSpec& spec) {
    return BuildContext{spec, p->config_, p->kb_, options.cache, options.base_dir};
  };

  if (config.knowledge_base) {
    p->kb_ = construct<KnowledgeBase>(registry, *config.knowledge_base, ctx(*config.knowledge_base));
    if (!p->kb_) throw InvalidParams("knowledge_base '" + config.knowledge_base->name + "' produced no KB");
  }
  p->loader_ = construct<Loader>(registry, config.loader, ctx(config.loader));
  if (!p->loader_) throw InvalidParams("loader '" + config.loader.name + "' produced no component");
  p->recognizer_ = construct<Recognizer>(registry, config.ner, ctx(config.ner));
  if (!p->recognizer_) throw InvalidParams("ner '" + config.ner.name + "' produced no component");
  p->generator_ = construct<CandidateGenerator>(registry, config.candidate_generator, ctx(config.candidate_generator));
  if (p->generator_) {
    p->reranker_ = construct<Reranker>(registry, config.reranker, ctx(config.reranker));
    p->disambiguator_ = construct<Disambiguator>(registry, config.disambiguator, ctx(config.disambiguator));
  }
  return p;
}

std::vector<Document> Pipeline::load(const RawInput& input) const { return loader_->load(input); }

std::vector<AnnotatedDocument> Pipeline::run_input(const RawInput& input) const {
  const auto t0 = Clock::now();
  std::vector<Document> docs = load(input);
  const double load_ms = elapsed_ms(t0);
  std::vector<AnnotatedDocument> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    AnnotatedDocument a = run(d);
    a.timings.insert(a.timings.begin(), StageTiming{Stage::load, load_ms});
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AnnotatedDocument> Pipeline::run_file(const std::string& path) const {
  return run_input(read_input_file(path));
}

AnnotatedDocument Pipeline::run(const Document& doc) const {
  if (doc.doc_id.empty()) throw InvalidParams("document id must be non-empty");
  if (!utf8::is_valid(doc.text)) throw DecodeError("document '" + doc.doc_id + "' is not valid UTF-8");

  AnnotatedDocument out;
  out.document = doc;

  // Stage 1: mention detection.
  auto t = Clock::now();
  std::vector<Mention> mentions;
  try {
    mentions = recognizer_->detect(doc);
  } catch (...) {
    rethrow_in_stage(Stage::ner, "document '" + doc.doc_id + "'");
  }
  for (const auto& m : mentions) {
    if (!mention_is_valid(m, doc.text)) {
      throw StageError("ner", describe(m), "mention violates span invariants", false);
    }
  }
  mentions = merge_mentions(std::move(mentions));
  out.timings.push_back(StageTiming{Stage::ner, elapsed_ms(t)});

  out.results.resize(mentions.size());
  for (std::size_t i = 0; i < mentions.size(); ++i) out.results[i].mention = mentions[i];
  if (!generator_) return out;

  const std::size_t workers = options_.mention_workers;

  // Stage 2: candidate generation.
  t = Clock::now();
  std::vector<std::vector<Candidate>> candidates(mentions.size());
  parallel_for(mentions.size(), workers, [&](std::size_t i) {
    try {
      candidates[i] = generator_->generate(make_query(doc, mentions[i]), config_.n_retrieve);
    } catch (...) {
      rethrow_in_stage(Stage::retrieve, describe(mentions[i]));
    }
    if (candidates[i].size() > config_.n_retrieve || !candidates_are_ranked(candidates[i])) {
      throw StageError("retrieve", describe(mentions[i]), "generator returned an unranked list", false);
    }
  });
  out.timings.push_back(StageTiming{Stage::retrieve, elapsed_ms(t)});

  // Stage 3: optional rerank, then the top-k cutoff.
  t = Clock::now();
  parallel_for(mentions.size(), workers, [&](std::size_t i) {
    if (reranker_) {
      try {
        candidates[i] = reranker_->rerank(doc, mentions[i], std::move(candidates[i]));
      } catch (...) {
        rethrow_in_stage(Stage::rerank, describe(mentions[i]));
      }
    }
    candidates[i] = cutoff(std::move(candidates[i]), config_.top_k);
  });
  out.timings.push_back(StageTiming{Stage::rerank, elapsed_ms(t)});

  if (!disambiguator_) {
    for (std::size_t i = 0; i < mentions.size(); ++i) out.results[i].candidates = std::move(candidates[i]);
    return out;
  }

  // Stage 4: disambiguation. A failing mention falls back to retrieval rank.
  t = Clock::now();
  parallel_for(mentions.size(), workers, [&](std::size_t i) {
    const auto& cands = candidates[i];
    LinkResult r;
    bool ok = false;
    try {
      r = disambiguator_->disambiguate(doc, mentions[i], cands);
      ok = r.status != LinkStatus::unresolved &&
           (r.status == LinkStatus::nil ||
            std::any_of(cands.begin(), cands.end(), [&](const Candidate& c) { return c.entity_id == r.entity_id; }));
      if (!ok) spdlog::warn("disambiguator returned an invalid decision for {}", describe(mentions[i]));
    } catch (const std::exception& e) {
      spdlog::warn("disambiguation failed for {}: {}", describe(mentions[i]), e.what());
    }
    if (!ok) {
      r = disambiguate_first(mentions[i], cands);
      r.fallback_used = true;
      r.confidence = 0.0;
    }
    r.mention = mentions[i];
    r.candidates = cands;
    out.results[i] = std::move(r);
  });
  out.timings.push_back(StageTiming{Stage::disambiguate, elapsed_ms(t)});
  return out;
}

Lela::Lela(const json& config, BuildOptions options)
    : Lela(PipelineConfig::from_json(config), std::move(options)) {}

Lela::Lela(const PipelineConfig& config, BuildOptions options)
    : pipeline_(build_pipeline(config, options, default_registry())) {}

std::vector<AnnotatedDocument> Lela::run(const std::string& path) const { return pipeline_->run_file(path); }

AnnotatedDocument Lela::run_text(std::string text, std::string doc_id) const {
  return pipeline_->run(Document{std::move(doc_id), std::move(text), "inline", Format::text});
}

}  // namespace lela
