#include "lela/config.hpp"

#include <fstream>
#include <sstream>

#include "lela/errors.hpp"

namespace lela {

std::string_view to_string(Slot s) {
  switch (s) {
    case Slot::loader: return "loader";
    case Slot::ner: return "ner";
    case Slot::candidate_generator: return "candidate_generator";
    case Slot::reranker: return "reranker";
    case Slot::disambiguator: return "disambiguator";
    case Slot::knowledge_base: return "knowledge_base";
  }
  return "loader";
}

std::optional<Slot> slot_from_string(std::string_view name) {
  for (Slot s : kAllSlots) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

const ComponentSpec* PipelineConfig::spec(Slot s) const {
  switch (s) {
    case Slot::loader: return &loader;
    case Slot::ner: return &ner;
    case Slot::candidate_generator: return &candidate_generator;
    case Slot::reranker: return &reranker;
    case Slot::disambiguator: return &disambiguator;
    case Slot::knowledge_base: return knowledge_base ? &*knowledge_base : nullptr;
  }
  return nullptr;
}

void PipelineConfig::validate() const {
  if (top_k < 1) throw InvalidParams("top_k must be >= 1");
  if (n_retrieve < top_k) {
    throw InvalidParams("top_k (" + std::to_string(top_k) + ") exceeds n_retrieve (" + std::to_string(n_retrieve) +
                        ")");
  }
  if (n_samples < 1) throw InvalidParams("n_samples must be >= 1");
  if (ner.name.empty()) throw InvalidParams("ner component name is empty");
}

namespace {

ComponentSpec parse_spec(const json& j, std::string_view slot) {
  if (!j.is_object()) throw InvalidParams(std::string(slot) + " must be an object");
  ComponentSpec spec;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "name") {
      if (!it->is_string() || it->get<std::string>().empty()) {
        throw InvalidParams(std::string(slot) + ".name must be a non-empty string");
      }
      spec.name = it->get<std::string>();
    } else if (it.key() == "params") {
      if (!it->is_object()) throw InvalidParams(std::string(slot) + ".params must be an object");
      spec.params = *it;
    } else {
      throw InvalidParams("unknown key '" + it.key() + "' in " + std::string(slot));
    }
  }
  if (spec.name.empty()) throw InvalidParams(std::string(slot) + ".name is required");
  return spec;
}

template <typename T>
T positive_int(const json& v, const char* key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw InvalidParams(std::string(key) + " must be a non-negative integer");
  }
  return static_cast<T>(v.get<long long>());
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  if (!j.is_object()) throw InvalidParams("config must be a JSON object");
  PipelineConfig cfg;
  bool has_ner = false;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "n_retrieve") {
      cfg.n_retrieve = positive_int<std::size_t>(*it, "n_retrieve");
    } else if (key == "top_k") {
      cfg.top_k = positive_int<std::size_t>(*it, "top_k");
    } else if (key == "n_samples") {
      cfg.n_samples = positive_int<int>(*it, "n_samples");
    } else if (auto slot = slot_from_string(key)) {
      ComponentSpec spec = parse_spec(*it, key);
      switch (*slot) {
        case Slot::loader: cfg.loader = std::move(spec); break;
        case Slot::ner:
          cfg.ner = std::move(spec);
          has_ner = true;
          break;
        case Slot::candidate_generator: cfg.candidate_generator = std::move(spec); break;
        case Slot::reranker: cfg.reranker = std::move(spec); break;
        case Slot::disambiguator: cfg.disambiguator = std::move(spec); break;
        case Slot::knowledge_base: cfg.knowledge_base = std::move(spec); break;
      }
    } else {
      throw InvalidParams("unknown config key '" + key + "'");
    }
  }
  if (!has_ner) throw InvalidParams("config is missing the 'ner' component");
  cfg.validate();
  return cfg;
}

json PipelineConfig::to_json() const {
  json j;
  for (Slot s : kAllSlots) {
    if (const ComponentSpec* c = spec(s)) j[std::string(to_string(s))] = {{"name", c->name}, {"params", c->params}};
  }
  j["n_retrieve"] = n_retrieve;
  j["top_k"] = top_k;
  j["n_samples"] = n_samples;
  return j;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParams("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str(), nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidParams("config is not valid JSON: " + std::string(e.what()));
  }
  return PipelineConfig::from_json(j);
}

}  // namespace lela
