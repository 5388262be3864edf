#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "lela/types.hpp"

namespace lela {

enum class Slot { loader, ner, candidate_generator, reranker, disambiguator, knowledge_base };

inline constexpr std::array<Slot, 6> kAllSlots = {Slot::loader,   Slot::ner,           Slot::candidate_generator,
                                                  Slot::reranker, Slot::disambiguator, Slot::knowledge_base};

std::string_view to_string(Slot s);
std::optional<Slot> slot_from_string(std::string_view name);

struct ComponentSpec {
  std::string name;
  json params = json::object();
};

inline constexpr std::size_t kDefaultRetrieve = 100;
inline constexpr std::size_t kDefaultTopK = 10;
inline constexpr int kDefaultSamples = 3;

/// The config object: six component slots plus the global retrieval depth,
/// top-k cutoff and number of self-consistency samples.
struct PipelineConfig {
  ComponentSpec loader{"auto", json::object()};
  ComponentSpec ner{"", json::object()};
  ComponentSpec candidate_generator{"bm25", json::object()};
  ComponentSpec reranker{"none", json::object()};
  ComponentSpec disambiguator{"first", json::object()};
  std::optional<ComponentSpec> knowledge_base;

  std::size_t n_retrieve = kDefaultRetrieve;
  std::size_t top_k = kDefaultTopK;
  int n_samples = kDefaultSamples;

  const ComponentSpec* spec(Slot s) const;

  /// Throws InvalidParams unless n_retrieve >= top_k >= 1 and n_samples >= 1.
  void validate() const;

  /// Accepts the six slot keys plus "n_retrieve", "top_k", "n_samples"; any
  /// other key is rejected with InvalidParams. "ner" is required.
  static PipelineConfig from_json(const json& j);
  json to_json() const;
};

/// Reads and parses a JSON config file. Throws InvalidParams on malformed JSON.
PipelineConfig load_config(const std::string& path);

}  // namespace lela
