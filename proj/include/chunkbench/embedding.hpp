#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chunkbench::embedding {

// Dense vector with finite entries. Values are held in double precision;
// at-rest formats choose their own width.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  // Throws Error on non-finite entries.
  explicit EmbeddingVector(std::vector<double> values);
  static EmbeddingVector zeros(std::size_t dim);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const;
  // Unit-length copy; the zero vector stays zero.
  EmbeddingVector normalized() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

struct Similarity {
  double value = 0.0;
  bool degenerate = false;  // one side had zero norm
};

// Both throw DimensionMismatch when dims differ.
Similarity cosine(const EmbeddingVector& a, const EmbeddingVector& b);
double l2_distance(const EmbeddingVector& a, const EmbeddingVector& b);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// Hashed character-trigram counts of the NFC text, L2-normalized. Texts
// shorter than three codepoints map to the zero vector.
EmbeddingVector embed_deterministic(std::string_view text, std::size_t dim);

enum class ProviderKind { Deterministic, Remote };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::Deterministic;
  std::size_t dim = 1024;
  std::string endpoint;  // remote only, e.g. "http://127.0.0.1:8080"
  bool normalize = true;
  std::size_t batch_size = 32;
  int retries = 2;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds retry_backoff{200};

  // Throws ConfigError.
  void validate() const;
  // Stable description used for cache keys and reports.
  std::string fingerprint() const;
};

std::string_view kind_name(ProviderKind kind);

// Client for the embedding wire protocol:
//   POST /v1/embed {"texts":[...],"normalize":bool} -> {"vectors","dim","model"}
// Retries transport failures and 5xx replies; throws ProviderError after the
// last attempt, DimensionMismatch when the service dim differs from cfg.dim.
std::vector<EmbeddingVector> embed_remote(std::span<const std::string> texts, const ProviderConfig& cfg);

struct HealthStatus {
  std::string status;
  std::size_t dim = 0;
};

// GET /healthz.
HealthStatus remote_health(const ProviderConfig& cfg);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
  virtual const ProviderConfig& config() const = 0;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& cfg);

// Content-addressed store of embeddings, keyed by hash of (provider
// fingerprint, text). Persisted as JSONL {"key": str, "vector": [float]}.
class EmbeddingCache {
 public:
  static std::string key_for(const ProviderConfig& cfg, std::string_view text);

  const EmbeddingVector* find(const std::string& key) const;
  void insert(std::string key, EmbeddingVector vector);
  std::size_t size() const noexcept { return entries_.size(); }

  // Missing file loads as an empty cache.
  static EmbeddingCache load(const std::filesystem::path& path);
  // Entries are written in key order.
  void save(const std::filesystem::path& path) const;

 private:
  std::map<std::string, EmbeddingVector> entries_;
};

// Serves cache hits and forwards misses to the wrapped provider in one batch.
class CachedProvider : public EmbeddingProvider {
 public:
  CachedProvider(EmbeddingProvider& inner, EmbeddingCache& cache) : inner_(inner), cache_(cache) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override;
  const ProviderConfig& config() const override { return inner_.config(); }

 private:
  EmbeddingProvider& inner_;
  EmbeddingCache& cache_;
};

}  // namespace chunkbench::embedding
