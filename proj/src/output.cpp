#include "lela/output.hpp"

#include "lela/errors.hpp"

namespace lela {

namespace {

ordered_json mention_json(const LinkResult& r) {
  ordered_json m;
  m["start"] = r.mention.start;
  m["end"] = r.mention.end;
  m["surface"] = r.mention.surface;
  m["label"] = r.mention.label;
  m["score"] = r.mention.score;
  if (r.status != LinkStatus::unresolved) {
    m["entity_id"] = r.status == LinkStatus::linked ? ordered_json(r.entity_id) : ordered_json(nullptr);
    m["confidence"] = r.confidence;
    m["fallback_used"] = r.fallback_used;
    m["votes"] = ordered_json::array();
    for (const auto& v : r.votes) {
      m["votes"].push_back({{"entity_id", v.entity_id ? ordered_json(*v.entity_id) : ordered_json(nullptr)},
                            {"count", v.count}});
    }
    if (const Candidate* c = r.chosen()) {
      ordered_json e;
      e["id"] = c->entity_id;
      e["label"] = c->label;
      e["description"] = c->description;
      if (!c->metadata.empty()) e["metadata"] = ordered_json::parse(c->metadata.dump());
      m["entity"] = std::move(e);
    } else {
      m["entity"] = nullptr;
    }
  }
  m["candidates"] = ordered_json::array();
  for (const auto& c : r.candidates) {
    ordered_json cj;
    cj["id"] = c.entity_id;
    cj["rank"] = c.rank;
    cj["score"] = c.retrieval_score;
    if (c.rerank_score) cj["rerank_score"] = *c.rerank_score;
    m["candidates"].push_back(std::move(cj));
  }
  return m;
}

}  // namespace

ordered_json to_output_json(const AnnotatedDocument& doc, const OutputOptions& options) {
  ordered_json j;
  j["doc_id"] = doc.document.doc_id;
  j["mentions"] = ordered_json::array();
  for (const auto& r : doc.results) j["mentions"].push_back(mention_json(r));
  if (options.include_timings) {
    j["timings_ms"] = ordered_json::object();
    for (const auto& t : doc.timings) j["timings_ms"][std::string(to_string(t.stage))] = t.elapsed_ms;
  }
  return j;
}

ordered_json error_record(const std::string& doc_id, const std::string& message) {
  ordered_json j;
  j["doc_id"] = doc_id;
  j["mentions"] = ordered_json::array();
  j["error"] = message;
  return j;
}

void write_output(const std::vector<AnnotatedDocument>& docs, std::ostream& sink, const OutputOptions& options) {
  for (const auto& d : docs) sink << to_output_json(d, options).dump() << '\n';
  sink.flush();
  if (!sink) throw Error("failed to write output");
}

AnnotatedDocument parse_output_line(std::string_view line) {
  const json j = json::parse(line);
  AnnotatedDocument doc;
  doc.document.doc_id = j.at("doc_id").get<std::string>();
  for (const auto& m : j.at("mentions")) {
    LinkResult r;
    r.mention.start = m.at("start").get<std::size_t>();
    r.mention.end = m.at("end").get<std::size_t>();
    r.mention.surface = m.at("surface").get<std::string>();
    r.mention.label = m.at("label").get<std::string>();
    r.mention.score = m.value("score", 1.0);
    if (m.contains("entity_id")) {
      if (m["entity_id"].is_null()) {
        r.status = LinkStatus::nil;
      } else {
        r.status = LinkStatus::linked;
        r.entity_id = m["entity_id"].get<std::string>();
      }
      r.confidence = m.value("confidence", 0.0);
      r.fallback_used = m.value("fallback_used", false);
      for (const auto& v : m.value("votes", json::array())) {
        VoteCount vc;
        if (!v.at("entity_id").is_null()) vc.entity_id = v["entity_id"].get<std::string>();
        vc.count = v.at("count").get<int>();
        r.votes.push_back(std::move(vc));
      }
    }
    const json* entity = m.contains("entity") && m["entity"].is_object() ? &m["entity"] : nullptr;
    for (const auto& c : m.at("candidates")) {
      Candidate cand;
      cand.entity_id = c.at("id").get<std::string>();
      cand.rank = c.at("rank").get<std::size_t>();
      cand.retrieval_score = c.at("score").get<double>();
      if (c.contains("rerank_score")) cand.rerank_score = c["rerank_score"].get<double>();
      if (entity && entity->at("id") == cand.entity_id) {
        cand.label = entity->value("label", "");
        cand.description = entity->value("description", "");
        if (entity->contains("metadata")) cand.metadata = (*entity)["metadata"];
      }
      r.candidates.push_back(std::move(cand));
    }
    doc.results.push_back(std::move(r));
  }
  if (j.contains("timings_ms")) {
    const json& t = j["timings_ms"];
    for (Stage s : {Stage::load, Stage::ner, Stage::retrieve, Stage::rerank, Stage::disambiguate}) {
      const std::string name(to_string(s));
      if (t.contains(name)) doc.timings.push_back(StageTiming{s, t[name].get<double>()});
    }
  }
  return doc;
}

}  // namespace lela
