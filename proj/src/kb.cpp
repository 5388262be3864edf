#include "lela/kb.hpp"

#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "lela/errors.hpp"
#include "lela/utf8.hpp"

namespace lela {

KnowledgeBase::KnowledgeBase(std::vector<KBEntity> entities) : entities_(std::move(entities)) {
  by_id_.reserve(entities_.size());
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (!by_id_.emplace(entities_[i].id, i).second) {
      throw DuplicateId(entities_[i].id, by_id_.at(entities_[i].id) + 1, i + 1);
    }
  }
}

const KBEntity* KnowledgeBase::find(std::string_view id) const {
  auto idx = index_of(id);
  return idx ? &entities_[*idx] : nullptr;
}

std::optional<std::size_t> KnowledgeBase::index_of(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw MissingField(key, line);
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

KnowledgeBase parse_kb(std::string_view content) {
  if (!utf8::is_valid(content)) throw DecodeError("knowledge base is not valid UTF-8");

  std::vector<KBEntity> entities;
  std::unordered_map<std::string, std::size_t> first_line;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    std::string_view line = content.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (is_blank(line)) {
      if (nl == content.size()) break;
      continue;
    }

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "expected a JSON object");

    KBEntity e;
    e.id = required_string(obj, "id", line_no);
    e.label = required_string(obj, "label", line_no);
    if (obj.contains("description") && !obj["description"].is_null()) {
      e.description = required_string(obj, "description", line_no);
    } else {
      throw MissingField("description", line_no);
    }
    if (e.id.empty()) throw ParseError(line_no, "empty id");
    if (e.label.empty()) throw ParseError(line_no, "empty label");
    if (e.description.empty()) spdlog::warn("KB entity '{}' (line {}) has an empty description", e.id, line_no);

    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (it.key() != "id" && it.key() != "label" && it.key() != "description") {
        e.metadata[it.key()] = it.value();
      }
    }

    auto [prev, inserted] = first_line.emplace(e.id, line_no);
    if (!inserted) throw DuplicateId(e.id, prev->second, line_no);
    entities.push_back(std::move(e));
    if (nl == content.size()) break;
  }
  return KnowledgeBase(std::move(entities));
}

KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open knowledge base: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_kb(ss.str());
}

std::string serialize_kb(const KnowledgeBase& kb) {
  std::string out;
  for (const auto& e : kb.entities()) {
    json obj = e.metadata;
    obj["id"] = e.id;
    obj["label"] = e.label;
    obj["description"] = e.description;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string candidate_text(const KBEntity& e) {
  if (e.description.empty()) return e.label;
  return e.label + ": " + e.description;
}

Candidate make_candidate(const KBEntity& e, double score, std::size_t rank) {
  Candidate c;
  c.entity_id = e.id;
  c.label = e.label;
  c.description = e.description;
  c.retrieval_score = score;
  c.rank = rank;
  c.metadata = e.metadata;
  return c;
}

}  // namespace lela
