#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lela/config.hpp"
#include "lela/registry.hpp"
#include "lela/types.hpp"

namespace lela {

struct BuildOptions {
  /// Relative paths in component params resolve against this directory.
  std::filesystem::path base_dir = ".";
  /// Shared response cache for every remote component; null disables caching.
  std::shared_ptr<ResponseCache> cache;
  /// Mentions processed concurrently within one stage.
  std::size_t mention_workers = 8;
};

/// An immutable, fully constructed pipeline. run() may be called concurrently.
class Pipeline {
 public:
  /// NER -> candidates -> rerank + cutoff -> disambiguation. Stages 2-4 are
  /// skipped when the candidate generator is "none". Timings are recorded for
  /// every executed stage.
  AnnotatedDocument run(const Document& doc) const;

  /// Loads with the configured loader; the load time is attached to each document.
  std::vector<AnnotatedDocument> run_input(const RawInput& input) const;
  std::vector<AnnotatedDocument> run_file(const std::string& path) const;
  std::vector<Document> load(const RawInput& input) const;

  const PipelineConfig& config() const { return config_; }
  const KnowledgeBase* knowledge_base() const { return kb_.get(); }
  bool links() const { return generator_ != nullptr; }
  bool reranks() const { return reranker_ != nullptr; }
  bool disambiguates() const { return disambiguator_ != nullptr; }

 private:
  friend std::shared_ptr<const Pipeline> build_pipeline(const PipelineConfig&, const BuildOptions&, const Registry&);
  Pipeline() = default;

  PipelineConfig config_;
  BuildOptions options_;
  std::shared_ptr<const KnowledgeBase> kb_;
  std::shared_ptr<const Loader> loader_;
  std::shared_ptr<const Recognizer> recognizer_;
  std::shared_ptr<const CandidateGenerator> generator_;
  std::shared_ptr<const Reranker> reranker_;
  std::shared_ptr<const Disambiguator> disambiguator_;
};

/// Resolves every slot in `registry` and constructs the components; the KB is
/// loaded and indexed once here. Throws UnknownComponent, InvalidParams, or
/// KB load errors.
std::shared_ptr<const Pipeline> build_pipeline(const PipelineConfig& config, const BuildOptions& options = {},
                                               const Registry& registry = default_registry());

inline AnnotatedDocument run(const Pipeline& pipeline, const Document& doc) { return pipeline.run(doc); }

/// Programmatic entry point: build from a config object, then run on files or text.
class Lela {
 public:
  explicit Lela(const json& config, BuildOptions options = {});
  explicit Lela(const PipelineConfig& config, BuildOptions options = {});

  std::vector<AnnotatedDocument> run(const std::string& path) const;
  AnnotatedDocument run_text(std::string text, std::string doc_id = "inline") const;
  const Pipeline& pipeline() const { return *pipeline_; }

 private:
  std::shared_ptr<const Pipeline> pipeline_;
};

}  // namespace lela
