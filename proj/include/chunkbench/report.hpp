#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chunkbench/evaluation.hpp"

namespace chunkbench::report {

// Settings every report records so runs are self-describing.
struct RunInfo {
  std::size_t k_retrieve = 5;
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  std::string provider = "deterministic";
  std::size_t dim = 1024;
  bool normalize = true;
  evaluation::Pairing pairing = evaluation::Pairing::PerQuestion;
  std::string llm = "mock:paragraph";

  bool operator==(const RunInfo&) const = default;
};

struct MethodRecords {
  chunkers::ChunkMethod method = chunkers::ChunkMethod::Recursive;
  std::vector<metrics::MetricRecord> records;

  bool operator==(const MethodRecords&) const = default;
};

struct Report {
  RunInfo run;
  std::vector<evaluation::MethodSummary> summaries;
  std::vector<evaluation::TTestResult> tests;
  std::vector<MethodRecords> records;

  const MethodRecords* records_for(chunkers::ChunkMethod method) const;
  bool operator==(const Report&) const = default;
};

enum class Format { Markdown, Json, Csv };
std::optional<Format> parse_format(std::string_view id);  // "md", "json", "csv"
std::string_view format_extension(Format format);

// Markdown column headers, in order.
const std::vector<std::string>& table_headers();

// Rows follow summaries order; t-tests form a second table. Json is lossless.
std::string render_report(const Report& report, Format format);

// Inverse of render_report(..., Format::Json). Throws ParseError.
Report report_from_json(std::string_view text);

// Single t-test as a markdown table (used by the compare command).
std::string render_ttest_table(const std::vector<evaluation::TTestResult>& tests);

}  // namespace chunkbench::report
