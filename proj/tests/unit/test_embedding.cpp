#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "chunkbench/embedding.hpp"
#include "chunkbench/error.hpp"
#include "chunkbench/unicode.hpp"
#include "support/random_text.hpp"

namespace fs = std::filesystem;
using namespace chunkbench;
using namespace chunkbench::embedding;

namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector(std::move(v)); }

EmbeddingVector random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) {
    x = n(rng);
  }
  return vec(std::move(v)).normalized();
}

class CountingProvider : public EmbeddingProvider {
 public:
  explicit CountingProvider(std::size_t dim) { cfg_.dim = dim; }
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    ++batches;
    embedded += texts.size();
    std::vector<EmbeddingVector> out;
    for (const auto& t : texts) {
      out.push_back(embed_deterministic(t, cfg_.dim));
    }
    return out;
  }
  const ProviderConfig& config() const override { return cfg_; }
  int batches = 0;
  std::size_t embedded = 0;

 private:
  ProviderConfig cfg_;
};

}  // namespace

TEST(EmbeddingVector, RejectsNonFinite) {
  EXPECT_THROW(vec({1.0, std::nan("")}), Error);
  EXPECT_THROW(vec({INFINITY}), Error);
}

TEST(EmbeddingVector, NormalizeZeroStaysZero) {
  EXPECT_EQ(EmbeddingVector::zeros(3).normalized(), EmbeddingVector::zeros(3));
  EXPECT_NEAR(vec({3, 4}).normalized().norm(), 1.0, 1e-15);
}

TEST(Cosine, Examples) {
  const auto v = vec({0.3, -1.2, 2.0});
  EXPECT_NEAR(cosine(v, v).value, 1.0, 1e-15);
  EXPECT_EQ(cosine(vec({1, 0}), vec({0, 1})).value, 0.0);
  EXPECT_NEAR(cosine(vec({1, 2, 2}), vec({2, 2, 1})).value, 8.0 / 9.0, 1e-15);
}

TEST(Cosine, ZeroVectorIsDegenerate) {
  const auto s = cosine(EmbeddingVector::zeros(2), vec({1, 0}));
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(s.value, 0.0);
}

TEST(Cosine, DimensionMismatch) {
  EXPECT_THROW(cosine(vec({1}), vec({1, 2})), DimensionMismatch);
  EXPECT_THROW(l2_distance(vec({1}), vec({1, 2})), DimensionMismatch);
}

TEST(L2, Examples) {
  const auto v = vec({0.5, -2});
  EXPECT_EQ(l2_distance(v, v), 0.0);
  EXPECT_EQ(l2_distance(vec({0, 0}), vec({3, 4})), 5.0);
}

TEST(L2, UnitVectorIdentity) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t dim = 2 + rng() % 64;
    const auto a = random_unit(rng, dim);
    const auto b = random_unit(rng, dim);
    const double l2 = l2_distance(a, b);
    EXPECT_NEAR(l2 * l2, 2.0 - 2.0 * cosine(a, b).value, 1e-9);
  }
}

TEST(Fnv1a64, KnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Deterministic, EmptyIsZeroVector) {
  const auto v = embed_deterministic("", 64);
  EXPECT_EQ(v, EmbeddingVector::zeros(64));
  EXPECT_EQ(embed_deterministic("ab", 64), EmbeddingVector::zeros(64));
}

TEST(Deterministic, RepeatableAndUnitNorm) {
  testsupport::RandomText gen(3);
  for (int i = 0; i < 100; ++i) {
    const auto text = gen.document();
    const auto a = embed_deterministic(text, 1024);
    EXPECT_EQ(a, embed_deterministic(text, 1024));
    if (unicode::decode_utf8(unicode::to_nfc(text)).size() >= 3) {
      EXPECT_NEAR(a.norm(), 1.0, 1e-9);
    }
  }
}

TEST(Deterministic, HandComputedTrigramBuckets) {
  // "abcd" has trigrams "abc" and "bcd"; each lands in fnv1a64 % dim with
  // count 1, so after normalization both buckets hold 1/sqrt(2) (or 2/2 = 1
  // if they collide).
  const std::size_t dim = 97;
  const auto v = embed_deterministic("abcd", dim);
  const std::size_t b1 = fnv1a64("abc") % dim;
  const std::size_t b2 = fnv1a64("bcd") % dim;
  ASSERT_NE(b1, b2);
  EXPECT_NEAR(v[b1], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v[b2], 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Deterministic, NfcBeforeHashing) {
  EXPECT_EQ(embed_deterministic("cafe\u0301 au lait", 128), embed_deterministic("caf\u00E9 au lait", 128));
}

TEST(Deterministic, PinnedValues) {
  // Cross-platform pin: the buckets of a fixed Khmer string never move.
  const auto v = embed_deterministic("ស្វាយចន្ទី", 1024);
  std::vector<std::size_t> nonzero;
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (v[i] != 0.0) {
      nonzero.push_back(i);
    }
  }
  const auto cps = unicode::decode_utf8("ស្វាយចន្ទី");
  std::set<std::size_t> expected;
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    expected.insert(fnv1a64(unicode::encode_utf8(cps.substr(i, 3))) % 1024);
  }
  EXPECT_EQ(std::set<std::size_t>(nonzero.begin(), nonzero.end()), expected);
}

TEST(ProviderConfig, ValidateAndFingerprint) {
  ProviderConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  ProviderConfig other = cfg;
  other.dim = 512;
  EXPECT_NE(cfg.fingerprint(), other.fingerprint());
  cfg.dim = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  ProviderConfig remote;
  remote.kind = ProviderKind::Remote;
  EXPECT_THROW(remote.validate(), ConfigError);
  remote.endpoint = "http://127.0.0.1:1";
  EXPECT_NO_THROW(remote.validate());
}

TEST(EmbeddingCache, KeysDependOnProviderAndText) {
  ProviderConfig a;
  ProviderConfig b;
  b.dim = 256;
  EXPECT_EQ(EmbeddingCache::key_for(a, "x"), EmbeddingCache::key_for(a, "x"));
  EXPECT_NE(EmbeddingCache::key_for(a, "x"), EmbeddingCache::key_for(b, "x"));
  EXPECT_NE(EmbeddingCache::key_for(a, "x"), EmbeddingCache::key_for(a, "y"));
}

TEST(EmbeddingCache, SaveLoadRoundtrip) {
  const fs::path path = fs::temp_directory_path() / "chunkbench_cache_test.jsonl";
  fs::remove(path);
  EXPECT_EQ(EmbeddingCache::load(path).size(), 0u);
  EmbeddingCache cache;
  cache.insert("k2", vec({0.1, 0.25, -3.5}));
  cache.insert("k1", vec({1.0 / 3.0, 0, 0}));
  cache.save(path);
  const auto loaded = EmbeddingCache::load(path);
  ASSERT_EQ(loaded.size(), 2u);
  ASSERT_NE(loaded.find("k1"), nullptr);
  EXPECT_EQ(*loaded.find("k1"), *cache.find("k1"));
  EXPECT_EQ(*loaded.find("k2"), *cache.find("k2"));
  EXPECT_EQ(loaded.find("k3"), nullptr);
}

TEST(CachedProvider, ForwardsOnlyMisses) {
  CountingProvider inner(32);
  EmbeddingCache cache;
  CachedProvider cached(inner, cache);
  const std::vector<std::string> first = {"alpha", "beta", "alpha"};
  const auto v1 = cached.embed(first);
  ASSERT_EQ(v1.size(), 3u);
  EXPECT_EQ(v1[0], v1[2]);
  EXPECT_EQ(inner.embedded, 2u);
  const std::vector<std::string> second = {"beta", "gamma"};
  const auto v2 = cached.embed(second);
  EXPECT_EQ(v2[0], v1[1]);
  EXPECT_EQ(inner.embedded, 3u);
  EXPECT_EQ(inner.batches, 2);
  const auto v3 = cached.embed(second);
  EXPECT_EQ(inner.batches, 2);
  EXPECT_EQ(v3, v2);
}

TEST(MakeProvider, Deterministic) {
  ProviderConfig cfg;
  cfg.dim = 16;
  auto p = make_provider(cfg);
  const std::vector<std::string> texts = {"hello there"};
  EXPECT_EQ(p->embed(texts)[0], embed_deterministic("hello there", 16));
}
