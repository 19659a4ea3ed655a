// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare
// thread counts; on a single core the two should be close.
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "chunkbench/embedding.hpp"
#include "chunkbench/evaluation.hpp"
#include "chunkbench/unicode.hpp"
#include "chunkbench/vecindex.hpp"
#include "support/random_text.hpp"

using namespace chunkbench;

namespace {

struct Rows {
  std::vector<float> rows;
  std::vector<double> query;
  std::vector<double> out;
};

Rows random_rows(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(99);
  std::normal_distribution<float> nd;
  Rows r;
  r.rows.resize(n * dim);
  for (auto& x : r.rows) {
    x = nd(rng);
  }
  r.query.resize(dim);
  for (auto& x : r.query) {
    x = nd(rng);
  }
  r.out.resize(n);
  return r;
}

void BM_L2Serial(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(1));
  auto r = random_rows(static_cast<std::size_t>(state.range(0)), dim);
  for (auto _ : state) {
    vecindex::kernels::l2_distances_serial(r.rows, dim, r.query, r.out);
    benchmark::DoNotOptimize(r.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_L2Parallel(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(1));
  auto r = random_rows(static_cast<std::size_t>(state.range(0)), dim);
  for (auto _ : state) {
    vecindex::kernels::l2_distances_parallel(r.rows, dim, r.query, r.out);
    benchmark::DoNotOptimize(r.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(BM_L2Serial)->Args({10000, 64})->Args({10000, 1024})->Args({100000, 256});
BENCHMARK(BM_L2Parallel)->Args({10000, 64})->Args({10000, 1024})->Args({100000, 256});

struct Workload {
  vecindex::FlatIndex index;
  std::vector<std::string> chunk_texts;
  std::vector<corpus::QAPair> qa;
  std::vector<embedding::EmbeddingVector> question_vecs;
  std::vector<embedding::EmbeddingVector> answer_vecs;
};

const Workload& workload() {
  static const Workload w = [] {
    constexpr std::size_t dim = 1024;
    testsupport::RandomText gen(5);
    auto sentence = [&gen] { return unicode::encode_utf8(gen.sentence()); };
    Workload w;
    std::vector<std::pair<std::string, embedding::EmbeddingVector>> entries;
    for (int i = 0; i < 2000; ++i) {
      w.chunk_texts.push_back(sentence());
      entries.emplace_back("c" + std::to_string(i), embedding::embed_deterministic(w.chunk_texts.back(), dim));
    }
    w.index = vecindex::build_index(entries, true);
    for (int i = 0; i < 200; ++i) {
      w.qa.push_back({"q" + std::to_string(i), sentence(), sentence()});
      w.question_vecs.push_back(embedding::embed_deterministic(w.qa.back().question, dim));
      w.answer_vecs.push_back(embedding::embed_deterministic(w.qa.back().answer, dim));
    }
    return w;
  }();
  return w;
}

void score(benchmark::State& state, vecindex::Execution exec) {
  const auto& w = workload();
  const evaluation::QuestionBatch batch{&w.qa, &w.question_vecs, &w.answer_vecs};
  const auto profile = corpus::ScriptProfile::for_metrics();
  for (auto _ : state) {
    auto records = evaluation::score_questions(w.index, w.chunk_texts, batch, 5, profile, exec);
    benchmark::DoNotOptimize(records.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.qa.size()));
}

void BM_ScoreQuestionsSerial(benchmark::State& state) { score(state, vecindex::Execution::Serial); }
void BM_ScoreQuestionsParallel(benchmark::State& state) { score(state, vecindex::Execution::Parallel); }

BENCHMARK(BM_ScoreQuestionsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreQuestionsParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
