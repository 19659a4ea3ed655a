#include "chunkbench/evaluation.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <string_view>
#include <unordered_map>

#include "chunkbench/error.hpp"

namespace chunkbench::evaluation {

std::string_view metric_id(Metric metric) {
  switch (metric) {
    case Metric::AvgL2:
      return "avg_l2";
    case Metric::KhmerCoverage:
      return "khmer_coverage";
    case Metric::AnswerRelevance:
      return "answer_relevance";
    case Metric::KhmerIou:
      return "khmer_iou";
  }
  return "unknown";
}

std::optional<Metric> parse_metric(std::string_view id) {
  for (Metric m : kMetrics) {
    if (metric_id(m) == id) {
      return m;
    }
  }
  return std::nullopt;
}

double metric_value(const metrics::MetricRecord& record, Metric metric) {
  switch (metric) {
    case Metric::AvgL2:
      return record.avg_l2;
    case Metric::KhmerCoverage:
      return record.khmer_coverage;
    case Metric::AnswerRelevance:
      return record.answer_relevance;
    case Metric::KhmerIou:
      return record.khmer_iou;
  }
  return 0.0;
}

namespace {

metrics::MetricRecord score_one(const vecindex::FlatIndex& index, const std::vector<std::string>& chunk_texts,
                                const QuestionBatch& batch, std::size_t q, std::size_t k_retrieve,
                                const corpus::ScriptProfile& profile) {
  const auto& qa = (*batch.qa)[q];
  metrics::RetrievalResult result;
  result.question_id = qa.id;
  result.k = k_retrieve;
  for (auto& hit : index.search((*batch.question_vecs)[q], k_retrieve, vecindex::Execution::Serial)) {
    const std::size_t row = index.find(hit.key);
    result.hits.push_back({std::move(hit.key), hit.distance, chunk_texts[row], index.vector(row)});
  }
  return metrics::score_question(result, qa.answer, (*batch.answer_vecs)[q], profile);
}

}  // namespace

std::vector<metrics::MetricRecord> score_questions(const vecindex::FlatIndex& index,
                                                   const std::vector<std::string>& chunk_texts,
                                                   const QuestionBatch& batch, std::size_t k_retrieve,
                                                   const corpus::ScriptProfile& profile, vecindex::Execution exec) {
  const std::size_t n = batch.qa->size();
  std::vector<metrics::MetricRecord> records(n);
  if (exec == vecindex::Execution::Serial) {
    for (std::size_t q = 0; q < n; ++q) {
      records[q] = score_one(index, chunk_texts, batch, q, k_retrieve, profile);
    }
    return records;
  }

  // Exceptions must not escape the parallel region; the first one is
  // rethrown afterwards.
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t q = 0; q < count; ++q) {
    const auto i = static_cast<std::size_t>(q);
    try {
      records[i] = score_one(index, chunk_texts, batch, i, k_retrieve, profile);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return records;
}

vecindex::FlatIndex index_chunks(const std::vector<chunkers::Chunk>& chunks, embedding::EmbeddingProvider& provider) {
  std::vector<std::string> texts;
  texts.reserve(chunks.size());
  for (const auto& c : chunks) {
    texts.push_back(c.text);
  }
  auto vecs = provider.embed(texts);
  if (vecs.size() != chunks.size()) {
    throw ProviderError("provider returned " + std::to_string(vecs.size()) + " vectors for " +
                        std::to_string(chunks.size()) + " chunks");
  }
  vecindex::FlatIndex index(provider.config().dim, provider.config().normalize);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    index.add(chunks[i].key(), vecs[i]);
  }
  return index;
}

std::vector<metrics::MetricRecord> evaluate_method(const std::vector<chunkers::Chunk>& chunks,
                                                   const std::vector<corpus::QAPair>& qa,
                                                   embedding::EmbeddingProvider& provider, std::size_t k_retrieve,
                                                   vecindex::Execution exec) {
  if (chunks.empty()) {
    throw Error("evaluate_method: no chunks to index");
  }
  if (qa.empty()) {
    throw Error("evaluate_method: no question-answer pairs");
  }
  if (k_retrieve < 1) {
    throw ConfigError("evaluate_method: k_retrieve must be >= 1");
  }

  const vecindex::FlatIndex index = index_chunks(chunks, provider);
  std::vector<std::string> chunk_texts;
  chunk_texts.reserve(chunks.size());
  for (const auto& c : chunks) {
    chunk_texts.push_back(c.text);
  }

  std::vector<std::string> questions;
  std::vector<std::string> answers;
  for (const auto& pair : qa) {
    questions.push_back(pair.question);
    answers.push_back(pair.answer);
  }
  const auto question_vecs = provider.embed(questions);
  const auto answer_vecs = provider.embed(answers);
  if (question_vecs.size() != qa.size() || answer_vecs.size() != qa.size()) {
    throw ProviderError("provider returned the wrong number of question/answer vectors");
  }

  QuestionBatch batch{&qa, &question_vecs, &answer_vecs};
  return score_questions(index, chunk_texts, batch, k_retrieve, corpus::ScriptProfile::for_metrics(), exec);
}

std::vector<metrics::MetricRecord> evaluate_method(const std::vector<chunkers::Chunk>& chunks,
                                                   const std::vector<corpus::QAPair>& qa,
                                                   const embedding::ProviderConfig& provider, std::size_t k_retrieve) {
  auto p = embedding::make_provider(provider);
  return evaluate_method(chunks, qa, *p, k_retrieve);
}

const MetricSummary& MethodSummary::of(Metric metric) const {
  return metrics[static_cast<std::size_t>(std::find(kMetrics.begin(), kMetrics.end(), metric) - kMetrics.begin())];
}

namespace {

// Fold f's mean of the metric, summing its questions in question-id order.
double fold_mean(const std::vector<metrics::MetricRecord>& records, const std::vector<std::size_t>& fold,
                 Metric metric) {
  std::vector<std::size_t> ordered = fold;
  std::sort(ordered.begin(), ordered.end(),
            [&](std::size_t a, std::size_t b) { return records[a].question_id < records[b].question_id; });
  double sum = 0.0;
  for (std::size_t i : ordered) {
    sum += metric_value(records[i], metric);
  }
  return sum / static_cast<double>(ordered.size());
}

void check_records_cover_folds(const std::vector<metrics::MetricRecord>& records, const FoldAssignment& folds) {
  std::size_t total = 0;
  for (const auto& fold : folds.folds) {
    total += fold.size();
    for (std::size_t i : fold) {
      if (i >= records.size()) {
        throw Error("fold index " + std::to_string(i) + " out of range for " + std::to_string(records.size()) +
                    " records");
      }
    }
  }
  if (total != records.size()) {
    throw Error("folds cover " + std::to_string(total) + " questions, records hold " +
                std::to_string(records.size()));
  }
}

}  // namespace

MethodSummary summarize(chunkers::ChunkMethod method, std::size_t chunk_count,
                        const std::vector<metrics::MetricRecord>& records, const FoldAssignment& folds) {
  check_records_cover_folds(records, folds);
  MethodSummary summary;
  summary.method = method;
  summary.chunk_count = chunk_count;
  for (std::size_t m = 0; m < kMetrics.size(); ++m) {
    auto& slot = summary.metrics[m];
    for (const auto& fold : folds.folds) {
      slot.fold_means.push_back(fold_mean(records, fold, kMetrics[m]));
    }
    slot.across_folds = aggregate(slot.fold_means);
  }
  return summary;
}

TTestResult compare_methods(chunkers::ChunkMethod method_a, const std::vector<metrics::MetricRecord>& records_a,
                            chunkers::ChunkMethod method_b, const std::vector<metrics::MetricRecord>& records_b,
                            Metric metric, Pairing pairing, const FoldAssignment& folds) {
  if (records_a.size() != records_b.size()) {
    throw Error("compare_methods: methods scored different numbers of questions");
  }
  // B reordered so aligned[i] answers the same question as records_a[i].
  std::unordered_map<std::string_view, const metrics::MetricRecord*> by_id;
  for (const auto& r : records_b) {
    if (!by_id.emplace(r.question_id, &r).second) {
      throw Error("compare_methods: duplicate question id " + r.question_id);
    }
  }
  std::vector<metrics::MetricRecord> aligned;
  aligned.reserve(records_a.size());
  for (const auto& r : records_a) {
    const auto it = by_id.find(r.question_id);
    if (it == by_id.end()) {
      throw Error("compare_methods: question " + r.question_id + " missing from " +
                  std::string(chunkers::method_label(method_b)));
    }
    aligned.push_back(*it->second);
  }

  std::vector<double> a;
  std::vector<double> b;
  if (pairing == Pairing::PerQuestion) {
    std::vector<std::size_t> order(records_a.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return records_a[x].question_id < records_a[y].question_id; });
    for (std::size_t i : order) {
      a.push_back(metric_value(records_a[i], metric));
      b.push_back(metric_value(aligned[i], metric));
    }
  } else {
    check_records_cover_folds(records_a, folds);
    for (const auto& fold : folds.folds) {
      a.push_back(fold_mean(records_a, fold, metric));
      b.push_back(fold_mean(aligned, fold, metric));
    }
  }

  TTestResult result;
  result.metric = metric;
  result.method_a = method_a;
  result.method_b = method_b;
  result.pairing = pairing;
  result.stats = paired_t_test(a, b);
  return result;
}

}  // namespace chunkbench::evaluation
