#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lela/types.hpp"

namespace lela {

using ordered_json = nlohmann::ordered_json;

struct OutputOptions {
  bool include_timings = true;
};

/// One output record:
///   {"doc_id", "mentions":[{"start","end","surface","label","score",
///     "entity_id" (null for NIL, absent when unresolved), "confidence",
///     "fallback_used", "votes", "entity", "candidates":[{"id","rank","score"}]}],
///    "timings_ms":{stage: ms}}
ordered_json to_output_json(const AnnotatedDocument& doc, const OutputOptions& options = {});

/// Record for a document that failed: {"doc_id", "mentions": [], "error"}.
ordered_json error_record(const std::string& doc_id, const std::string& message);

/// Writes one compact JSON line per document.
void write_output(const std::vector<AnnotatedDocument>& docs, std::ostream& sink, const OutputOptions& options = {});

/// Inverse of to_output_json over the serialized fields. Document text is not
/// part of the record and comes back empty.
AnnotatedDocument parse_output_line(std::string_view line);

}  // namespace lela
