#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lela/backends.hpp"
#include "lela/config.hpp"
#include "lela/kb.hpp"
#include "lela/loaders.hpp"
#include "lela/retrieval.hpp"
#include "lela/types.hpp"

namespace lela {

// Component protocol. Implementations must be safe to call concurrently.

class Loader {
 public:
  virtual ~Loader() = default;
  virtual std::vector<Document> load(const RawInput& input) const = 0;
};

/// Slot 1: populates the document's mentions.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual std::vector<Mention> detect(const Document& doc) const = 0;
};

/// Slot 2: ranked candidates for one mention.
class CandidateGenerator {
 public:
  virtual ~CandidateGenerator() = default;
  virtual std::vector<Candidate> generate(const Query& query, std::size_t n) const = 0;
};

class Reranker {
 public:
  virtual ~Reranker() = default;
  virtual std::vector<Candidate> rerank(const Document& doc, const Mention& mention,
                                        std::vector<Candidate> candidates) const = 0;
};

/// Slot 3: resolves a mention against its (cut-off) candidate list.
class Disambiguator {
 public:
  virtual ~Disambiguator() = default;
  virtual LinkResult disambiguate(const Document& doc, const Mention& mention,
                                  std::span<const Candidate> candidates) const = 0;
};

/// Everything a factory may consult while constructing its component.
struct BuildContext {
  const ComponentSpec& spec;
  const PipelineConfig& config;
  std::shared_ptr<const KnowledgeBase> kb;  // null while building the KB itself
  std::shared_ptr<ResponseCache> cache;     // may be null
  std::filesystem::path base_dir;

  const json& params() const { return spec.params; }
};

template <typename T>
using Factory = std::function<std::shared_ptr<const T>(const BuildContext&)>;

/// A factory returning nullptr disables its stage (e.g. reranker "none").
using AnyFactory = std::variant<Factory<Loader>, Factory<Recognizer>, Factory<CandidateGenerator>,
                                Factory<Reranker>, Factory<Disambiguator>, Factory<KnowledgeBase>>;

template <typename T> struct SlotOf;
template <> struct SlotOf<Loader> { static constexpr Slot value = Slot::loader; };
template <> struct SlotOf<Recognizer> { static constexpr Slot value = Slot::ner; };
template <> struct SlotOf<CandidateGenerator> { static constexpr Slot value = Slot::candidate_generator; };
template <> struct SlotOf<Reranker> { static constexpr Slot value = Slot::reranker; };
template <> struct SlotOf<Disambiguator> { static constexpr Slot value = Slot::disambiguator; };
template <> struct SlotOf<KnowledgeBase> { static constexpr Slot value = Slot::knowledge_base; };

/// Maps (slot, name) to component factories. Thread-safe.
class Registry {
 public:
  Registry() = default;
  Registry(const Registry& other);
  Registry& operator=(const Registry& other);

  /// Registers or replaces (with a log line) a factory. Throws InvalidParams
  /// for an empty name or a factory whose type does not match the slot.
  void register_component(Slot slot, const std::string& name, AnyFactory factory);

  template <typename T>
  void add(const std::string& name, Factory<T> factory) {
    register_component(SlotOf<T>::value, name, AnyFactory(std::move(factory)));
  }

  bool contains(Slot slot, const std::string& name) const;
  std::vector<std::string> names(Slot slot) const;

  /// Throws UnknownComponent naming the slot and name.
  template <typename T>
  Factory<T> resolve(const std::string& name) const {
    return std::get<Factory<T>>(lookup(SlotOf<T>::value, name));
  }

 private:
  AnyFactory lookup(Slot slot, const std::string& name) const;

  mutable std::mutex mutex_;
  std::map<Slot, std::map<std::string, AnyFactory>> factories_;
};

/// Registers every built-in component.
void register_builtins(Registry& registry);

/// Process-wide registry, pre-populated with the built-ins. User extensions
/// registered here are visible to every later build.
Registry& default_registry();

}  // namespace lela
