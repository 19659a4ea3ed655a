#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chunkbench/chunkers.hpp"
#include "chunkbench/corpus.hpp"
#include "chunkbench/embedding.hpp"
#include "chunkbench/metrics.hpp"
#include "chunkbench/vecindex.hpp"

namespace chunkbench::evaluation {

// SplitMix64 (Steele, Lea, Flood). Fixed so fold assignments reproduce across
// implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

struct FoldAssignment {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;
};

// Fisher-Yates shuffle of 0..n-1 (j = next() % (i + 1), i from n-1 down to 1),
// then dealt round-robin into k folds. Throws ConfigError unless 1 <= k <= n.
FoldAssignment kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, divisor n - 1
  bool singleton = false;

  bool operator==(const Aggregate&) const = default;
};

// Throws Error on an empty list. A single value has std 0 and the singleton
// flag set.
Aggregate aggregate(std::span<const double> values);

// "0.4295 ± 0.0461"
std::string format_mean_std(const Aggregate& agg);

// Regularized incomplete beta I_x(a, b) by Lentz continued fraction.
double regularized_incomplete_beta(double x, double a, double b);

// Two-tailed Student-t p-value: I_{df/(df+t^2)}(df/2, 1/2). Throws ConfigError
// for df < 1.
double t_tail_probability(double t, double df);

enum class Pairing { PerQuestion, PerFold };
std::string_view pairing_id(Pairing pairing);
std::optional<Pairing> parse_pairing(std::string_view id);

struct TTestStats {
  double t = 0.0;  // +-infinity when the differences are a nonzero constant
  std::size_t df = 0;
  double p = 1.0;
  bool degenerate = false;

  bool operator==(const TTestStats&) const = default;
};

// Paired test on d_i = a_i - b_i. Throws Error on length mismatch or n < 2.
TTestStats paired_t_test(std::span<const double> a, std::span<const double> b);

enum class Metric { AvgL2, KhmerCoverage, AnswerRelevance, KhmerIou };
inline constexpr std::array<Metric, 4> kMetrics = {Metric::AvgL2, Metric::KhmerCoverage, Metric::AnswerRelevance,
                                                   Metric::KhmerIou};
// Field name used in MetricRecord JSONL ("avg_l2", ...).
std::string_view metric_id(Metric metric);
std::optional<Metric> parse_metric(std::string_view id);
double metric_value(const metrics::MetricRecord& record, Metric metric);

// Per-question scoring over a built index. Questions are independent; the
// parallel form distributes them over OpenMP threads and produces the same
// records as the serial form.
struct QuestionBatch {
  const std::vector<corpus::QAPair>* qa = nullptr;
  const std::vector<embedding::EmbeddingVector>* question_vecs = nullptr;
  const std::vector<embedding::EmbeddingVector>* answer_vecs = nullptr;
};
std::vector<metrics::MetricRecord> score_questions(const vecindex::FlatIndex& index,
                                                   const std::vector<std::string>& chunk_texts,
                                                   const QuestionBatch& batch, std::size_t k_retrieve,
                                                   const corpus::ScriptProfile& profile,
                                                   vecindex::Execution exec = vecindex::Execution::Parallel);

// Embeds chunks and questions, builds a flat index, retrieves the top
// k_retrieve chunks per question and scores them. Records follow qa order.
// Throws Error on empty chunks or qa.
std::vector<metrics::MetricRecord> evaluate_method(const std::vector<chunkers::Chunk>& chunks,
                                                   const std::vector<corpus::QAPair>& qa,
                                                   embedding::EmbeddingProvider& provider, std::size_t k_retrieve,
                                                   vecindex::Execution exec = vecindex::Execution::Parallel);
std::vector<metrics::MetricRecord> evaluate_method(const std::vector<chunkers::Chunk>& chunks,
                                                   const std::vector<corpus::QAPair>& qa,
                                                   const embedding::ProviderConfig& provider, std::size_t k_retrieve);

// Builds the index evaluate_method uses: keys are Chunk::key(), rows are the
// provider's embeddings of the chunk texts.
vecindex::FlatIndex index_chunks(const std::vector<chunkers::Chunk>& chunks, embedding::EmbeddingProvider& provider);

struct MetricSummary {
  Aggregate across_folds;
  std::vector<double> fold_means;

  bool operator==(const MetricSummary&) const = default;
};

struct MethodSummary {
  chunkers::ChunkMethod method = chunkers::ChunkMethod::Recursive;
  std::size_t chunk_count = 0;
  std::array<MetricSummary, 4> metrics;  // indexed like kMetrics

  const MetricSummary& of(Metric metric) const;
  bool operator==(const MethodSummary&) const = default;
};

// Per-question metrics are averaged within each fold (summing in question-id
// order); mean and sample std are then taken over the k fold means.
// records[i] belongs to qa index i.
MethodSummary summarize(chunkers::ChunkMethod method, std::size_t chunk_count,
                        const std::vector<metrics::MetricRecord>& records, const FoldAssignment& folds);

struct TTestResult {
  Metric metric = Metric::AvgL2;
  chunkers::ChunkMethod method_a = chunkers::ChunkMethod::Recursive;
  chunkers::ChunkMethod method_b = chunkers::ChunkMethod::Recursive;
  Pairing pairing = Pairing::PerQuestion;
  TTestStats stats;

  bool operator==(const TTestResult&) const = default;
};

// Records are matched by question id. PerFold pairs the fold means of the two
// methods. Throws Error when the question sets differ.
TTestResult compare_methods(chunkers::ChunkMethod method_a, const std::vector<metrics::MetricRecord>& records_a,
                            chunkers::ChunkMethod method_b, const std::vector<metrics::MetricRecord>& records_b,
                            Metric metric, Pairing pairing, const FoldAssignment& folds);

}  // namespace chunkbench::evaluation
