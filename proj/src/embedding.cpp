#include "chunkbench/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "chunkbench/error.hpp"
#include "chunkbench/io.hpp"
#include "chunkbench/unicode.hpp"

namespace chunkbench::embedding {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error("embedding vector contains a non-finite entry");
    }
  }
}

EmbeddingVector EmbeddingVector::zeros(std::size_t dim) { return EmbeddingVector(std::vector<double>(dim, 0.0)); }

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (double v : values_) {
    sum += v * v;
  }
  return std::sqrt(sum);
}

EmbeddingVector EmbeddingVector::normalized() const {
  const double n = norm();
  if (n == 0.0) {
    return *this;
  }
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) {
    out[i] = values_[i] / n;
  }
  return EmbeddingVector(std::move(out));
}

namespace {

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("vector dims differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

Similarity cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  double dot = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) {
    return {0.0, true};
  }
  const double c = dot / (std::sqrt(aa) * std::sqrt(bb));
  return {std::clamp(c, -1.0, 1.0), false};
}

double l2_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

EmbeddingVector embed_deterministic(std::string_view text, std::size_t dim) {
  if (dim == 0) {
    throw ConfigError("embedding dim must be >= 1");
  }
  const std::u32string cps = unicode::to_nfc(unicode::decode_utf8(text));
  std::vector<double> counts(dim, 0.0);
  if (cps.size() < 3) {
    return EmbeddingVector(std::move(counts));
  }
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    const std::string trigram = unicode::encode_utf8(std::u32string_view(cps).substr(i, 3));
    counts[fnv1a64(trigram) % dim] += 1.0;
  }
  return EmbeddingVector(std::move(counts)).normalized();
}

std::string_view kind_name(ProviderKind kind) {
  return kind == ProviderKind::Remote ? "remote" : "deterministic";
}

void ProviderConfig::validate() const {
  if (dim < 1) {
    throw ConfigError("provider: dim must be >= 1");
  }
  if (batch_size < 1) {
    throw ConfigError("provider: batch_size must be >= 1");
  }
  if (retries < 0) {
    throw ConfigError("provider: retries must be >= 0");
  }
  if (kind == ProviderKind::Remote && endpoint.empty()) {
    throw ConfigError("provider: remote provider requires an endpoint");
  }
}

std::string ProviderConfig::fingerprint() const {
  std::ostringstream out;
  out << kind_name(kind) << ";dim=" << dim << ";normalize=" << (normalize ? 1 : 0);
  if (kind == ProviderKind::Remote) {
    out << ";endpoint=" << endpoint;
  }
  return out.str();
}

namespace {

class DeterministicProvider : public EmbeddingProvider {
 public:
  explicit DeterministicProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
      // Output is already unit length (or zero).
      out.push_back(embed_deterministic(text, cfg_.dim));
    }
    return out;
  }

  const ProviderConfig& config() const override { return cfg_; }

 private:
  ProviderConfig cfg_;
};

class RemoteProvider : public EmbeddingProvider {
 public:
  explicit RemoteProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    return embed_remote(texts, cfg_);
  }

  const ProviderConfig& config() const override { return cfg_; }

 private:
  ProviderConfig cfg_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& cfg) {
  cfg.validate();
  if (cfg.kind == ProviderKind::Remote) {
    return std::make_unique<RemoteProvider>(cfg);
  }
  return std::make_unique<DeterministicProvider>(cfg);
}

std::string EmbeddingCache::key_for(const ProviderConfig& cfg, std::string_view text) {
  std::string material = cfg.fingerprint();
  material.push_back('\0');
  material.append(text);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(material)));
  return buf;
}

const EmbeddingVector* EmbeddingCache::find(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingCache::insert(std::string key, EmbeddingVector vector) {
  entries_.insert_or_assign(std::move(key), std::move(vector));
}

EmbeddingCache EmbeddingCache::load(const std::filesystem::path& path) {
  EmbeddingCache cache;
  if (!std::filesystem::exists(path)) {
    return cache;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) {
      continue;
    }
    try {
      auto obj = nlohmann::json::parse(line);
      cache.insert(obj.at("key").get<std::string>(), EmbeddingVector(obj.at("vector").get<std::vector<double>>()));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), number, e.what());
    }
  }
  return cache;
}

void EmbeddingCache::save(const std::filesystem::path& path) const {
  std::string payload;
  for (const auto& [key, vec] : entries_) {
    nlohmann::json obj;
    obj["key"] = key;
    obj["vector"] = std::vector<double>(vec.values().begin(), vec.values().end());
    payload += obj.dump();
    payload.push_back('\n');
  }
  io::write_file_atomic(path, payload);
}

std::vector<EmbeddingVector> CachedProvider::embed(std::span<const std::string> texts) {
  const ProviderConfig& cfg = inner_.config();
  std::vector<std::string> keys;
  keys.reserve(texts.size());
  std::vector<std::string> missing;
  std::vector<std::string> missing_keys;
  std::unordered_set<std::string> pending;
  for (const auto& text : texts) {
    keys.push_back(EmbeddingCache::key_for(cfg, text));
    if (cache_.find(keys.back()) == nullptr && pending.insert(keys.back()).second) {
      missing.push_back(text);
      missing_keys.push_back(keys.back());
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_.embed(missing);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      cache_.insert(missing_keys[i], std::move(fresh[i]));
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& key : keys) {
    out.push_back(*cache_.find(key));
  }
  return out;
}

}  // namespace chunkbench::embedding
