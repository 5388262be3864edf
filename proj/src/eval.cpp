#include "lela/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "lela/errors.hpp"

namespace lela {

void EvalReport::finalize() {
  precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : (fn == 0 ? 1.0 : 0.0);
  recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : (fp == 0 ? 1.0 : 0.0);
  f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

json EvalReport::to_json() const {
  json j;
  j["tp"] = tp;
  j["fp"] = fp;
  j["fn"] = fn;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  if (ci95) j["ci95"] = {ci95->first, ci95->second};
  if (!per_group.empty()) {
    j["per_group"] = json::object();
    for (const auto& [name, r] : per_group) j["per_group"][name] = r.to_json();
  }
  return j;
}

EvalReport score_inkb(const std::vector<LinkResult>& predictions, const GoldAnnotation& gold,
                      std::optional<std::size_t> doc_length) {
  std::map<std::pair<std::size_t, std::size_t>, std::string> gold_links;
  for (const auto& s : gold.spans) {
    if (s.start >= s.end || (doc_length && s.end > *doc_length)) {
      throw OffsetOutOfRange("gold span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                             ") invalid for document '" + gold.doc_id + "'");
    }
    if (s.entity_id) gold_links.emplace(std::make_pair(s.start, s.end), *s.entity_id);
  }

  EvalReport r;
  std::set<std::pair<std::size_t, std::size_t>> matched;
  for (const auto& p : predictions) {
    if (p.status != LinkStatus::linked) continue;
    const auto key = std::make_pair(p.mention.start, p.mention.end);
    auto it = gold_links.find(key);
    if (it != gold_links.end() && it->second == p.entity_id && !matched.contains(key)) {
      matched.insert(key);
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn = gold_links.size() - r.tp;
  r.finalize();
  return r;
}

EvalReport aggregate(const std::map<std::string, EvalReport>& groups, AggregateMode mode) {
  EvalReport out;
  if (groups.empty()) {
    out.finalize();
    return out;
  }
  for (const auto& [name, g] : groups) {
    out.tp += g.tp;
    out.fp += g.fp;
    out.fn += g.fn;
  }
  if (mode == AggregateMode::micro) {
    out.finalize();
  } else {
    double p = 0.0, r = 0.0, f = 0.0;
    for (const auto& [name, g] : groups) {
      p += g.precision;
      r += g.recall;
      f += g.f1;
    }
    const double n = static_cast<double>(groups.size());
    out.precision = p / n;
    out.recall = r / n;
    out.f1 = f / n;
  }
  out.per_group = groups;
  return out;
}

std::vector<double> bootstrap_f1(const std::vector<EvalReport>& per_doc, std::size_t resamples, std::uint64_t seed) {
  std::vector<double> out;
  if (per_doc.empty() || resamples == 0) return out;
  out.reserve(resamples);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, per_doc.size() - 1);
  for (std::size_t r = 0; r < resamples; ++r) {
    EvalReport sum;
    for (std::size_t i = 0; i < per_doc.size(); ++i) {
      const auto& d = per_doc[pick(rng)];
      sum.tp += d.tp;
      sum.fp += d.fp;
      sum.fn += d.fn;
    }
    sum.finalize();
    out.push_back(sum.f1);
  }
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

std::pair<double, double> bootstrap_ci(const std::vector<EvalReport>& per_doc, std::size_t resamples,
                                       std::uint64_t seed) {
  const auto samples = bootstrap_f1(per_doc, resamples, seed);
  return {percentile(samples, 0.025), percentile(samples, 0.975)};
}

std::vector<GoldAnnotation> parse_gold(std::string_view content) {
  std::vector<GoldAnnotation> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      GoldAnnotation g;
      if (!j.contains("doc_id")) throw MissingField("doc_id", line_no);
      g.doc_id = j.at("doc_id").get<std::string>();
      if (j.contains("group") && j["group"].is_string()) g.group = j["group"].get<std::string>();
      if (!j.contains("spans")) throw MissingField("spans", line_no);
      for (const auto& s : j.at("spans")) {
        GoldSpan span;
        span.start = s.at("start").get<std::size_t>();
        span.end = s.at("end").get<std::size_t>();
        if (s.contains("entity_id") && !s["entity_id"].is_null()) span.entity_id = s["entity_id"].get<std::string>();
        g.spans.push_back(std::move(span));
      }
      std::sort(g.spans.begin(), g.spans.end(),
                [](const GoldSpan& a, const GoldSpan& b) { return std::tie(a.start, a.end) < std::tie(b.start, b.end); });
      out.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::vector<GoldAnnotation> load_gold(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open gold file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_gold(ss.str());
}

std::string format_report_table(const EvalReport& report) {
  std::ostringstream out;
  const auto row = [&out](const std::string& name, const EvalReport& r) {
    out << std::left << std::setw(16) << name << std::right << std::setw(6) << r.tp << std::setw(6) << r.fp
        << std::setw(6) << r.fn << std::fixed << std::setprecision(1) << std::setw(8) << r.precision * 100
        << std::setw(8) << r.recall * 100 << std::setw(8) << r.f1 * 100;
    if (r.ci95) out << "  [" << r.ci95->first * 100 << ", " << r.ci95->second * 100 << "]";
    out << '\n';
  };
  out << std::left << std::setw(16) << "group" << std::right << std::setw(6) << "tp" << std::setw(6) << "fp"
      << std::setw(6) << "fn" << std::setw(8) << "P" << std::setw(8) << "R" << std::setw(8) << "F1" << '\n';
  for (const auto& [name, r] : report.per_group) row(name, r);
  row("total", report);
  return out.str();
}

}  // namespace lela
