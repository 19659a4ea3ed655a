#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "chunkbench/corpus.hpp"
#include "chunkbench/embedding.hpp"

namespace chunkbench::metrics {

struct RetrievedChunk {
  std::string key;
  double distance = 0.0;
  std::string text;
  embedding::EmbeddingVector vector;
};

struct RetrievalResult {
  std::string question_id;
  std::vector<RetrievedChunk> hits;  // ascending by distance
  std::size_t k = 0;
};

// Names of the degenerate cases a MetricRecord can carry.
inline constexpr std::string_view kFlagZeroRelevance = "answer_relevance_zero_vector";
inline constexpr std::string_view kFlagNoCoverageText = "coverage_empty_denominator";
inline constexpr std::string_view kFlagEmptyUnion = "khmer_iou_empty_union";

struct MetricRecord {
  std::string question_id;
  double avg_l2 = 0.0;
  double answer_relevance = 0.0;
  double khmer_coverage = 0.0;
  double khmer_iou = 0.0;
  std::set<std::string> flags;

  bool operator==(const MetricRecord&) const = default;
};

struct Score {
  double value = 0.0;
  bool degenerate = false;
};

// Mean of the hit distances actually returned. Throws Error on no hits.
double avg_retrieval_l2(const RetrievalResult& result);

// Cosine between the componentwise mean of the hit vectors and the answer
// vector. Throws Error on no hits, DimensionMismatch on dim disagreement.
Score answer_relevance(const RetrievalResult& result, const embedding::EmbeddingVector& answer_vec);

// Khmer codepoints over non-whitespace codepoints, after normalization with
// the profile.
Score khmer_coverage(std::string_view retrieved_text, const corpus::ScriptProfile& profile);

// IoU of the unique Khmer codepoint sets of both texts, after normalization
// with the profile.
Score khmer_iou(std::string_view retrieved_text, std::string_view answer_text, const corpus::ScriptProfile& profile);

// Hit texts joined by "\n".
std::string retrieved_text(const RetrievalResult& result);

MetricRecord score_question(const RetrievalResult& result, std::string_view answer_text,
                            const embedding::EmbeddingVector& answer_vec, const corpus::ScriptProfile& profile);

std::string to_jsonl(const std::vector<MetricRecord>& records);
std::vector<MetricRecord> records_from_jsonl(std::string_view text);

}  // namespace chunkbench::metrics
