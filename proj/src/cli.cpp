#include "lela/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "lela/errors.hpp"
#include "lela/eval.hpp"
#include "lela/output.hpp"
#include "lela/parallel.hpp"
#include "lela/pipeline.hpp"
#include "lela/utf8.hpp"

namespace lela {

namespace fs = std::filesystem;

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    std::error_code ec;
    if (fs::is_directory(in, ec)) {
      std::vector<std::string> files;
      for (const auto& entry : fs::directory_iterator(in, ec)) {
        if (entry.is_regular_file() && has_known_extension(entry.path().string())) {
          files.push_back(entry.path().string());
        }
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(in);
    }
  }
  return out;
}

namespace {

struct FileResult {
  std::vector<ordered_json> records;
  std::vector<AnnotatedDocument> docs;  // successful documents, for evaluation
  bool failed = false;
};

FileResult process_file(const Pipeline& pipeline, const std::string& path, const OutputOptions& options) {
  FileResult result;
  std::vector<AnnotatedDocument> docs;
  try {
    docs = pipeline.run_file(path);
  } catch (const std::exception& e) {
    // Per-document isolation only applies once the file loaded; retry
    // document by document so one bad document does not hide the rest.
    std::vector<Document> loaded;
    try {
      loaded = pipeline.load(read_input_file(path));
    } catch (const std::exception& load_error) {
      result.records.push_back(error_record(path, load_error.what()));
      result.failed = true;
      return result;
    }
    for (const auto& d : loaded) {
      try {
        AnnotatedDocument a = pipeline.run(d);
        result.records.push_back(to_output_json(a, options));
        result.docs.push_back(std::move(a));
      } catch (const std::exception& doc_error) {
        result.records.push_back(error_record(d.doc_id, doc_error.what()));
        result.failed = true;
      }
    }
    return result;
  }
  for (auto& a : docs) {
    result.records.push_back(to_output_json(a, options));
    result.docs.push_back(std::move(a));
  }
  return result;
}

EvalReport evaluate(const std::vector<AnnotatedDocument>& docs, const std::vector<GoldAnnotation>& gold) {
  std::map<std::string, const AnnotatedDocument*> by_id;
  for (const auto& d : docs) by_id.emplace(d.document.doc_id, &d);

  std::vector<EvalReport> per_doc;
  std::map<std::string, std::vector<EvalReport>> per_group_docs;
  std::map<std::string, EvalReport> groups;
  static const std::vector<LinkResult> kNone;
  for (const auto& g : gold) {
    auto it = by_id.find(g.doc_id);
    const auto& preds = it == by_id.end() ? kNone : it->second->results;
    std::optional<std::size_t> len;
    if (it != by_id.end()) len = utf8::length(it->second->document.text);
    EvalReport r = score_inkb(preds, g, len);
    per_doc.push_back(r);
    if (g.group) {
      auto& acc = groups[*g.group];
      acc.tp += r.tp;
      acc.fp += r.fp;
      acc.fn += r.fn;
      per_group_docs[*g.group].push_back(r);
    }
  }

  EvalReport total;
  if (groups.size() > 1) {
    for (auto& [name, r] : groups) {
      r.finalize();
      r.ci95 = bootstrap_ci(per_group_docs[name]);
    }
    total = aggregate(groups, AggregateMode::macro);
  } else {
    for (const auto& r : per_doc) {
      total.tp += r.tp;
      total.fp += r.fp;
      total.fn += r.fn;
    }
    total.finalize();
  }
  if (!per_doc.empty()) total.ci95 = bootstrap_ci(per_doc);
  return total;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot entity linking over a JSONL knowledge base", "lela"};
  std::string config_path;
  std::vector<std::string> inputs;
  std::string output_path;
  std::string gold_path;
  std::string report_path;
  std::string cache_dir;
  bool quiet = false;
  bool no_timings = false;
  std::size_t jobs = 1;

  app.add_option("--config", config_path, "Pipeline config (JSON)")->required();
  app.add_option("--input", inputs, "Input files or directories")->required()->expected(1, -1);
  app.add_option("--output", output_path, "Write JSONL results here instead of stdout");
  app.add_option("--gold", gold_path, "Gold annotations (JSONL); prints an InKB evaluation");
  app.add_option("--report", report_path, "Write the evaluation report as JSON (with --gold)");
  app.add_option("--cache-dir", cache_dir, "Directory for the inference response cache");
  app.add_flag("--quiet", quiet, "No progress output");
  app.add_flag("--no-timings", no_timings, "Omit timings_ms so repeated runs produce identical output");
  app.add_option("--jobs", jobs, "Documents processed in parallel")->check(CLI::PositiveNumber);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfigError;
  }

  std::shared_ptr<const Pipeline> pipeline;
  std::vector<GoldAnnotation> gold;
  try {
    const PipelineConfig config = load_config(config_path);
    BuildOptions options;
    options.base_dir = fs::absolute(config_path).parent_path();
    if (!cache_dir.empty()) options.cache = std::make_shared<ResponseCache>(cache_dir);
    pipeline = build_pipeline(config, options);
    if (!gold_path.empty()) gold = load_gold(gold_path);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const std::vector<std::string> files = expand_inputs(inputs);
  OutputOptions out_options;
  out_options.include_timings = !no_timings;

  std::vector<FileResult> results(files.size());
  std::mutex progress_mutex;
  std::size_t done = 0;
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    results[i] = process_file(*pipeline, files[i], out_options);
    if (!quiet) {
      std::lock_guard lock(progress_mutex);
      err << "doc " << ++done << "/" << files.size() << " " << files[i] << '\n';
    }
  });

  std::ofstream file_out;
  std::ostream* sink = &out;
  if (!output_path.empty()) {
    file_out.open(output_path, std::ios::binary | std::ios::trunc);
    if (!file_out) {
      err << "cannot open output: " << output_path << '\n';
      return kExitDocumentError;
    }
    sink = &file_out;
  }

  bool failed = false;
  std::set<std::string> seen_ids;
  std::vector<AnnotatedDocument> all_docs;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto& r = results[i];
    failed = failed || r.failed;
    for (auto& rec : r.records) {
      const std::string id = rec["doc_id"].get<std::string>();
      if (!rec.contains("error") && !seen_ids.insert(id).second) {
        rec = error_record(id, "duplicate doc_id");
        failed = true;
      }
      if (rec.contains("error")) err << "error: " << id << ": " << rec["error"].get<std::string>() << '\n';
      *sink << rec.dump() << '\n';
    }
    for (auto& d : r.docs) all_docs.push_back(std::move(d));
  }
  sink->flush();
  if (!*sink) {
    err << "failed writing output\n";
    return kExitDocumentError;
  }

  if (!gold.empty()) {
    try {
      const EvalReport report = evaluate(all_docs, gold);
      err << format_report_table(report);
      if (!report_path.empty()) {
        std::ofstream rep(report_path, std::ios::trunc);
        rep << report.to_json().dump(2) << '\n';
        if (!rep) {
          err << "cannot write report: " << report_path << '\n';
          return kExitDocumentError;
        }
      }
    } catch (const std::exception& e) {
      err << "evaluation error: " << e.what() << '\n';
      return kExitDocumentError;
    }
  }
  return failed ? kExitDocumentError : kExitOk;
}

}  // namespace lela
