#include "chunkbench/metrics.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "chunkbench/error.hpp"
#include "chunkbench/unicode.hpp"

namespace chunkbench::metrics {

double avg_retrieval_l2(const RetrievalResult& result) {
  if (result.hits.empty()) {
    throw Error("avg_retrieval_l2: no hits for question \"" + result.question_id + "\"");
  }
  double sum = 0.0;
  for (const auto& hit : result.hits) {
    sum += hit.distance;
  }
  return sum / static_cast<double>(result.hits.size());
}

Score answer_relevance(const RetrievalResult& result, const embedding::EmbeddingVector& answer_vec) {
  if (result.hits.empty()) {
    throw Error("answer_relevance: no hits for question \"" + result.question_id + "\"");
  }
  const std::size_t dim = answer_vec.dim();
  std::vector<double> mean(dim, 0.0);
  for (const auto& hit : result.hits) {
    if (hit.vector.dim() != dim) {
      throw DimensionMismatch("answer_relevance: hit \"" + hit.key + "\" has dim " + std::to_string(hit.vector.dim()) +
                              ", answer has dim " + std::to_string(dim));
    }
    for (std::size_t i = 0; i < dim; ++i) {
      mean[i] += hit.vector[i];
    }
  }
  const auto n = static_cast<double>(result.hits.size());
  for (double& v : mean) {
    v /= n;
  }
  const auto sim = embedding::cosine(embedding::EmbeddingVector(std::move(mean)), answer_vec);
  return {sim.value, sim.degenerate};
}

Score khmer_coverage(std::string_view retrieved_text, const corpus::ScriptProfile& profile) {
  const std::u32string text = unicode::decode_utf8(corpus::normalize_text(retrieved_text, profile));
  std::size_t khmer = 0;
  std::size_t counted = 0;
  for (char32_t ch : text) {
    if (unicode::is_whitespace(ch)) {
      continue;
    }
    ++counted;
    if (corpus::is_khmer(ch, profile)) {
      ++khmer;
    }
  }
  if (counted == 0) {
    return {0.0, true};
  }
  return {static_cast<double>(khmer) / static_cast<double>(counted), false};
}

Score khmer_iou(std::string_view retrieved_text, std::string_view answer_text, const corpus::ScriptProfile& profile) {
  const auto r = corpus::khmer_char_set(corpus::normalize_text(retrieved_text, profile), profile);
  const auto a = corpus::khmer_char_set(corpus::normalize_text(answer_text, profile), profile);
  std::vector<char32_t> inter;
  std::vector<char32_t> uni;
  std::set_intersection(r.begin(), r.end(), a.begin(), a.end(), std::back_inserter(inter));
  std::set_union(r.begin(), r.end(), a.begin(), a.end(), std::back_inserter(uni));
  if (uni.empty()) {
    return {0.0, true};
  }
  return {static_cast<double>(inter.size()) / static_cast<double>(uni.size()), false};
}

std::string retrieved_text(const RetrievalResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.hits.size(); ++i) {
    if (i > 0) {
      out.push_back('\n');
    }
    out += result.hits[i].text;
  }
  return out;
}

MetricRecord score_question(const RetrievalResult& result, std::string_view answer_text,
                            const embedding::EmbeddingVector& answer_vec, const corpus::ScriptProfile& profile) {
  MetricRecord record;
  record.question_id = result.question_id;
  record.avg_l2 = avg_retrieval_l2(result);

  const Score relevance = answer_relevance(result, answer_vec);
  record.answer_relevance = relevance.value;
  if (relevance.degenerate) {
    record.flags.emplace(kFlagZeroRelevance);
  }

  const std::string joined = retrieved_text(result);
  const Score coverage = khmer_coverage(joined, profile);
  record.khmer_coverage = coverage.value;
  if (coverage.degenerate) {
    record.flags.emplace(kFlagNoCoverageText);
  }

  const Score iou = khmer_iou(joined, answer_text, profile);
  record.khmer_iou = iou.value;
  if (iou.degenerate) {
    record.flags.emplace(kFlagEmptyUnion);
  }
  return record;
}

std::string to_jsonl(const std::vector<MetricRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json obj;
    obj["question_id"] = r.question_id;
    obj["avg_l2"] = r.avg_l2;
    obj["answer_relevance"] = r.answer_relevance;
    obj["khmer_coverage"] = r.khmer_coverage;
    obj["khmer_iou"] = r.khmer_iou;
    obj["flags"] = std::vector<std::string>(r.flags.begin(), r.flags.end());
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<MetricRecord> records_from_jsonl(std::string_view text) {
  std::vector<MetricRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) {
      continue;
    }
    try {
      auto obj = nlohmann::json::parse(line);
      MetricRecord r;
      r.question_id = obj.at("question_id").get<std::string>();
      r.avg_l2 = obj.at("avg_l2").get<double>();
      r.answer_relevance = obj.at("answer_relevance").get<double>();
      r.khmer_coverage = obj.at("khmer_coverage").get<double>();
      r.khmer_iou = obj.at("khmer_iou").get<double>();
      for (const auto& f : obj.at("flags")) {
        r.flags.insert(f.get<std::string>());
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("metric records", number, e.what());
    }
  }
  return out;
}

}  // namespace chunkbench::metrics
