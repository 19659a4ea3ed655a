#include "chunkbench/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>

#include "chunkbench/error.hpp"

namespace chunkbench::report {

namespace {

using nlohmann::ordered_json;
using evaluation::kMetrics;

std::string fixed4(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  std::string s = buf;
  if (s == "-0.0000") {
    s.erase(0, 1);
  }
  return s;
}

std::string fixed6(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") {
    s.erase(0, 1);
  }
  return s;
}

ordered_json double_to_json(double v) {
  if (std::isinf(v)) {
    return v > 0 ? "inf" : "-inf";
  }
  return v;
}

double double_from_json(const ordered_json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (s == "-inf") {
      return -std::numeric_limits<double>::infinity();
    }
    throw ParseError("report.json", 0, "unexpected number string \"" + s + "\"");
  }
  return j.get<double>();
}

chunkers::ChunkMethod method_from_json(const ordered_json& j) {
  const auto id = j.get<std::string>();
  auto m = chunkers::parse_method(id);
  if (!m) {
    throw ParseError("report.json", 0, "unknown method \"" + id + "\"");
  }
  return *m;
}

std::string markdown_summary(const Report& report) {
  std::string out;
  out += "| ";
  const auto& headers = table_headers();
  for (std::size_t i = 0; i < headers.size(); ++i) {
    out += headers[i];
    out += i + 1 < headers.size() ? " | " : " |\n";
  }
  out += "|---|---:|---:|---:|---:|---:|\n";
  for (const auto& s : report.summaries) {
    out += "| ";
    out += chunkers::method_label(s.method);
    out += " | " + std::to_string(s.chunk_count);
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      out += " | " + evaluation::format_mean_std(s.metrics[m].across_folds);
    }
    out += " |\n";
  }
  return out;
}

}  // namespace

const MethodRecords* Report::records_for(chunkers::ChunkMethod method) const {
  for (const auto& r : records) {
    if (r.method == method) {
      return &r;
    }
  }
  return nullptr;
}

std::optional<Format> parse_format(std::string_view id) {
  if (id == "md" || id == "markdown") {
    return Format::Markdown;
  }
  if (id == "json") {
    return Format::Json;
  }
  if (id == "csv") {
    return Format::Csv;
  }
  return std::nullopt;
}

std::string_view format_extension(Format format) {
  switch (format) {
    case Format::Markdown:
      return "md";
    case Format::Json:
      return "json";
    case Format::Csv:
      return "csv";
  }
  return "txt";
}

const std::vector<std::string>& table_headers() {
  static const std::vector<std::string> headers = {
      "Method", "Chunks QTY", "Avg Retr. (L2)↓", "Khmer Cov.↑", "Ans. Rel. (Cos)↑", "Khmer IoU↑",
  };
  return headers;
}

std::string render_ttest_table(const std::vector<evaluation::TTestResult>& tests) {
  std::string out = "| Metric | Method A | Method B | Pairing | t | df | p |\n";
  out += "|---|---|---|---|---:|---:|---:|\n";
  for (const auto& t : tests) {
    out += "| ";
    out += evaluation::metric_id(t.metric);
    out += " | ";
    out += chunkers::method_label(t.method_a);
    out += " | ";
    out += chunkers::method_label(t.method_b);
    out += " | ";
    out += evaluation::pairing_id(t.pairing);
    out += " | " + fixed4(t.stats.t) + " | " + std::to_string(t.stats.df) + " | " + fixed4(t.stats.p);
    out += t.stats.degenerate ? " (degenerate) |\n" : " |\n";
  }
  return out;
}

std::string render_report(const Report& report, Format format) {
  const RunInfo& run = report.run;
  switch (format) {
    case Format::Markdown: {
      std::string out = "# Chunking strategy comparison\n\n";
      out += "Retrieval top-k: " + std::to_string(run.k_retrieve) + "; folds: " + std::to_string(run.folds) +
             "; seed: " + std::to_string(run.seed) + "; provider: " + run.provider + " (dim " +
             std::to_string(run.dim) + ", normalize " + (run.normalize ? "true" : "false") + "); LLM: " + run.llm +
             "; t-test pairing: " + std::string(evaluation::pairing_id(run.pairing)) + ".\n\n";
      out += "Values are mean ± std across fold means.\n\n";
      out += markdown_summary(report);
      out += "\n## Paired t-tests (two-tailed)\n\n";
      out += render_ttest_table(report.tests);
      return out;
    }
    case Format::Csv: {
      std::string out = "method,chunks";
      for (auto m : kMetrics) {
        out += ",";
        out += evaluation::metric_id(m);
        out += "_mean,";
        out += evaluation::metric_id(m);
        out += "_std";
      }
      out += "\n";
      for (const auto& s : report.summaries) {
        out += std::string(chunkers::method_id(s.method)) + "," + std::to_string(s.chunk_count);
        for (std::size_t m = 0; m < kMetrics.size(); ++m) {
          out += "," + fixed6(s.metrics[m].across_folds.mean) + "," + fixed6(s.metrics[m].across_folds.std);
        }
        out += "\n";
      }
      out += "\nmetric,method_a,method_b,pairing,t,df,p,degenerate\n";
      for (const auto& t : report.tests) {
        out += std::string(evaluation::metric_id(t.metric)) + "," + std::string(chunkers::method_id(t.method_a)) +
               "," + std::string(chunkers::method_id(t.method_b)) + "," +
               std::string(evaluation::pairing_id(t.pairing)) + "," + fixed6(t.stats.t) + "," +
               std::to_string(t.stats.df) + "," + fixed6(t.stats.p) + "," + (t.stats.degenerate ? "true" : "false") +
               "\n";
      }
      return out;
    }
    case Format::Json: {
      ordered_json j;
      j["run"] = {
          {"k_retrieve", run.k_retrieve}, {"folds", run.folds},         {"seed", run.seed},
          {"provider", run.provider},     {"dim", run.dim},             {"normalize", run.normalize},
          {"pairing", std::string(evaluation::pairing_id(run.pairing))}, {"llm", run.llm},
      };
      j["summaries"] = ordered_json::array();
      for (const auto& s : report.summaries) {
        ordered_json row;
        row["method"] = std::string(chunkers::method_id(s.method));
        row["chunk_count"] = s.chunk_count;
        for (std::size_t m = 0; m < kMetrics.size(); ++m) {
          const auto& ms = s.metrics[m];
          row[std::string(evaluation::metric_id(kMetrics[m]))] = {
              {"mean", ms.across_folds.mean},
              {"std", ms.across_folds.std},
              {"singleton", ms.across_folds.singleton},
              {"fold_means", ms.fold_means},
          };
        }
        j["summaries"].push_back(std::move(row));
      }
      j["tests"] = ordered_json::array();
      for (const auto& t : report.tests) {
        j["tests"].push_back({
            {"metric", std::string(evaluation::metric_id(t.metric))},
            {"method_a", std::string(chunkers::method_id(t.method_a))},
            {"method_b", std::string(chunkers::method_id(t.method_b))},
            {"pairing", std::string(evaluation::pairing_id(t.pairing))},
            {"t", double_to_json(t.stats.t)},
            {"df", t.stats.df},
            {"p", t.stats.p},
            {"degenerate", t.stats.degenerate},
        });
      }
      j["records"] = ordered_json::object();
      for (const auto& mr : report.records) {
        ordered_json rows = ordered_json::array();
        for (const auto& r : mr.records) {
          rows.push_back({
              {"question_id", r.question_id},
              {"avg_l2", r.avg_l2},
              {"answer_relevance", r.answer_relevance},
              {"khmer_coverage", r.khmer_coverage},
              {"khmer_iou", r.khmer_iou},
              {"flags", std::vector<std::string>(r.flags.begin(), r.flags.end())},
          });
        }
        j["records"][std::string(chunkers::method_id(mr.method))] = std::move(rows);
      }
      return j.dump(2) + "\n";
    }
  }
  return {};
}

Report report_from_json(std::string_view text) {
  Report report;
  try {
    const auto j = ordered_json::parse(text);
    const auto& run = j.at("run");
    report.run.k_retrieve = run.at("k_retrieve").get<std::size_t>();
    report.run.folds = run.at("folds").get<std::size_t>();
    report.run.seed = run.at("seed").get<std::uint64_t>();
    report.run.provider = run.at("provider").get<std::string>();
    report.run.dim = run.at("dim").get<std::size_t>();
    report.run.normalize = run.at("normalize").get<bool>();
    auto pairing = evaluation::parse_pairing(run.at("pairing").get<std::string>());
    if (!pairing) {
      throw ParseError("report.json", 0, "unknown pairing");
    }
    report.run.pairing = *pairing;
    report.run.llm = run.at("llm").get<std::string>();

    for (const auto& row : j.at("summaries")) {
      evaluation::MethodSummary s;
      s.method = method_from_json(row.at("method"));
      s.chunk_count = row.at("chunk_count").get<std::size_t>();
      for (std::size_t m = 0; m < kMetrics.size(); ++m) {
        const auto& ms = row.at(std::string(evaluation::metric_id(kMetrics[m])));
        s.metrics[m].across_folds.mean = ms.at("mean").get<double>();
        s.metrics[m].across_folds.std = ms.at("std").get<double>();
        s.metrics[m].across_folds.singleton = ms.at("singleton").get<bool>();
        s.metrics[m].fold_means = ms.at("fold_means").get<std::vector<double>>();
      }
      report.summaries.push_back(std::move(s));
    }
    for (const auto& row : j.at("tests")) {
      evaluation::TTestResult t;
      auto metric = evaluation::parse_metric(row.at("metric").get<std::string>());
      auto tp = evaluation::parse_pairing(row.at("pairing").get<std::string>());
      if (!metric || !tp) {
        throw ParseError("report.json", 0, "unknown metric or pairing in tests");
      }
      t.metric = *metric;
      t.pairing = *tp;
      t.method_a = method_from_json(row.at("method_a"));
      t.method_b = method_from_json(row.at("method_b"));
      t.stats.t = double_from_json(row.at("t"));
      t.stats.df = row.at("df").get<std::size_t>();
      t.stats.p = row.at("p").get<double>();
      t.stats.degenerate = row.at("degenerate").get<bool>();
      report.tests.push_back(t);
    }
    for (const auto& [method, rows] : j.at("records").items()) {
      MethodRecords mr;
      mr.method = method_from_json(ordered_json(method));
      for (const auto& row : rows) {
        metrics::MetricRecord r;
        r.question_id = row.at("question_id").get<std::string>();
        r.avg_l2 = row.at("avg_l2").get<double>();
        r.answer_relevance = row.at("answer_relevance").get<double>();
        r.khmer_coverage = row.at("khmer_coverage").get<double>();
        r.khmer_iou = row.at("khmer_iou").get<double>();
        for (const auto& f : row.at("flags")) {
          r.flags.insert(f.get<std::string>());
        }
        mr.records.push_back(std::move(r));
      }
      report.records.push_back(std::move(mr));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("report.json", 0, e.what());
  }
  return report;
}

}  // namespace chunkbench::report
