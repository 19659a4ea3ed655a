#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "chunkbench/error.hpp"
#include "chunkbench/vecindex.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace chunkbench;
using namespace chunkbench::vecindex;
using embedding::EmbeddingVector;

namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("chunkbench_vecindex_" + name); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) { std::ofstream(p, std::ios::binary) << bytes; }

}  // namespace

TEST(FlatIndex, EmptyIndexReturnsNoHits) {
  const auto index = build_index({}, true);
  EXPECT_EQ(index.size(), 0u);
  EXPECT_TRUE(index.search(vec({1, 2}), 5).empty());
}

TEST(FlatIndex, CountPlumbing) {
  std::vector<std::pair<std::string, EmbeddingVector>> entries;
  for (int i = 0; i < 1055; ++i) {
    std::vector<double> v(1024, 0.0);
    v[i % 1024] = 1.0;
    entries.emplace_back("c" + std::to_string(i), vec(std::move(v)));
  }
  EXPECT_EQ(build_index(entries, true).size(), 1055u);
}

TEST(FlatIndex, DuplicateKeyNamed) {
  FlatIndex index(2);
  index.add("a", vec({0, 0}));
  try {
    index.add("a", vec({1, 1}));
    FAIL() << "expected Error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("\"a\""), std::string::npos) << e.what();
  }
  EXPECT_THROW(index.add("b", vec({1, 1, 1})), DimensionMismatch);
}

TEST(FlatIndex, ExactMatchFirst) {
  FlatIndex index(3);
  index.add("x", vec({0.25, 0.5, 1}));
  index.add("y", vec({1, 0, 0}));
  const auto hits = index.search(vec({0.25, 0.5, 1}), 1);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].key, "x");
  EXPECT_EQ(hits[0].distance, 0.0);
}

TEST(FlatIndex, KLargerThanCount) {
  FlatIndex index(1);
  index.add("far", vec({10}));
  index.add("near", vec({1}));
  const auto hits = index.search(vec({0}), 50);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].key, "near");
  EXPECT_EQ(hits[1].key, "far");
}

TEST(FlatIndex, TwoDimensionalHandScan) {
  FlatIndex index(2);
  index.add("d", vec({3, 3}));
  index.add("c", vec({0, 2}));
  index.add("b", vec({1, 0}));
  index.add("a", vec({0, 0}));
  const auto hits = index.search(vec({1, 1}), 4);
  const std::vector<Hit> expected = {
      {"b", 1.0}, {"a", std::sqrt(2.0)}, {"c", std::sqrt(2.0)}, {"d", 2.0 * std::sqrt(2.0)}};
  EXPECT_EQ(hits, expected);
}

TEST(FlatIndex, MatchesNaiveScanBothExecutions) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng() % 600;
    const std::size_t dim = 1 + rng() % 16;
    FlatIndex index(dim);
    std::vector<std::string> keys;
    std::vector<std::vector<float>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      std::vector<float> f(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        v[d] = static_cast<double>(static_cast<int>(rng() % 5) - 2);
        f[d] = static_cast<float>(v[d]);
      }
      keys.push_back("k" + std::to_string(rng() % 100000) + "_" + std::to_string(i));
      rows.push_back(f);
      index.add(keys.back(), vec(v));
    }
    std::vector<double> q(dim);
    for (auto& x : q) {
      x = static_cast<double>(static_cast<int>(rng() % 5) - 2);
    }
    const std::size_t k = 1 + rng() % 20;
    const auto oracle = testsupport::naive_search(keys, rows, q, k);
    for (auto exec : {Execution::Serial, Execution::Parallel}) {
      const auto hits = index.search(vec(q), k, exec);
      ASSERT_EQ(hits.size(), oracle.size());
      for (std::size_t i = 0; i < hits.size(); ++i) {
        EXPECT_EQ(hits[i].key, oracle[i].key);
        EXPECT_EQ(hits[i].distance, oracle[i].distance);
      }
    }
  }
}

TEST(Kernels, SerialAndParallelAgree) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1, 1);
  const std::size_t n = 3000;
  const std::size_t dim = 33;
  std::vector<float> rows(n * dim);
  for (auto& x : rows) {
    x = u(rng);
  }
  std::vector<double> q(dim);
  for (auto& x : q) {
    x = u(rng);
  }
  std::vector<double> a(n);
  std::vector<double> b(n);
  kernels::l2_distances_serial(rows, dim, q, a);
  kernels::l2_distances_parallel(rows, dim, q, b);
  EXPECT_EQ(a, b);
}

TEST(IndexFile, RoundtripSearchIdentical) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  FlatIndex index(12, true);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(12);
    for (auto& x : v) {
      x = nd(rng);
    }
    index.add("doc#" + std::to_string(i), vec(v).normalized());
  }
  const auto path = temp_path("roundtrip.cbvx");
  save_index(index, path);
  const auto loaded = load_index(path);
  EXPECT_EQ(loaded.size(), index.size());
  EXPECT_EQ(loaded.dim(), 12u);
  EXPECT_TRUE(loaded.normalize_flag());
  EXPECT_EQ(loaded.keys(), index.keys());
  EXPECT_EQ(loaded.data(), index.data());
  EXPECT_EQ(loaded.find("doc#17"), 17u);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> q(12);
    for (auto& x : q) {
      x = nd(rng);
    }
    EXPECT_EQ(loaded.search(vec(q), 7), index.search(vec(q), 7));
  }
}

TEST(IndexFile, TruncatedIsCorrupt) {
  FlatIndex index(4);
  index.add("a", vec({1, 2, 3, 4}));
  index.add("b", vec({4, 3, 2, 1}));
  const auto path = temp_path("trunc.cbvx");
  save_index(index, path);
  const std::string bytes = slurp(path);
  for (std::size_t cut : {bytes.size() - 1, bytes.size() - 5, bytes.size() / 2, std::size_t{10}, std::size_t{3}}) {
    spit(path, bytes.substr(0, cut));
    EXPECT_THROW(load_index(path), CorruptIndexError) << cut;
  }
}

TEST(IndexFile, FlippedPayloadByteIsCorrupt) {
  FlatIndex index(2);
  index.add("a", vec({1, 2}));
  const auto path = temp_path("flip.cbvx");
  save_index(index, path);
  std::string bytes = slurp(path);
  bytes[bytes.size() - 6] ^= 0x40;
  spit(path, bytes);
  EXPECT_THROW(load_index(path), CorruptIndexError);
}

TEST(IndexFile, UnknownVersion) {
  FlatIndex index(2);
  index.add("a", vec({1, 2}));
  const auto path = temp_path("version.cbvx");
  save_index(index, path);
  std::string bytes = slurp(path);
  bytes[4] = 9;
  spit(path, bytes);
  EXPECT_THROW(load_index(path), IndexVersionError);
}

TEST(IndexFile, BadMagic) {
  const auto path = temp_path("magic.cbvx");
  spit(path, "NOPE0000000000000000000");
  EXPECT_THROW(load_index(path), CorruptIndexError);
}
