#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lela/types.hpp"

namespace lela {

struct GoldSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::optional<std::string> entity_id;  // nullopt = NIL
};

struct GoldAnnotation {
  std::string doc_id;
  std::vector<GoldSpan> spans;
  std::optional<std::string> group;  // e.g. a domain, for macro averaging
};

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, EvalReport> per_group;
  std::optional<std::pair<double, double>> ci95;

  /// Recomputes precision, recall and F1 from the counts. Without predictions
  /// precision is 1 when nothing was missed, else 0; recall mirrors this.
  void finalize();
  json to_json() const;
};

/// InKB scoring: gold NIL spans are dropped, NIL and unresolved predictions
/// are ignored, and a link counts as correct only on exact (start, end) and
/// entity agreement. `doc_length` (code points), when given, bounds gold offsets.
EvalReport score_inkb(const std::vector<LinkResult>& predictions, const GoldAnnotation& gold,
                      std::optional<std::size_t> doc_length = std::nullopt);

enum class AggregateMode { micro, macro };

/// Micro sums counts; macro averages the group P, R and F1 unweighted.
EvalReport aggregate(const std::map<std::string, EvalReport>& groups, AggregateMode mode);

/// Micro-F1 of each bootstrap resample of documents (with replacement).
std::vector<double> bootstrap_f1(const std::vector<EvalReport>& per_doc, std::size_t resamples, std::uint64_t seed);

/// Linear-interpolation percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// 2.5th and 97.5th percentiles of bootstrap_f1.
std::pair<double, double> bootstrap_ci(const std::vector<EvalReport>& per_doc, std::size_t resamples = 1000,
                                       std::uint64_t seed = 0);

/// Gold JSONL: {"doc_id", "spans":[{"start","end","entity_id"}], "group"?}.
std::vector<GoldAnnotation> parse_gold(std::string_view content);
std::vector<GoldAnnotation> load_gold(const std::string& path);

/// Aligned-column table: one row per group (if any) plus a total row.
std::string format_report_table(const EvalReport& report);

}  // namespace lela
