#include "chunkbench/vecindex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <zlib.h>

#include "chunkbench/io.hpp"

namespace chunkbench::vecindex {

namespace kernels {

void l2_distances_serial(std::span<const float> rows, std::size_t dim, std::span<const double> query,
                         std::span<double> out) {
  for (std::size_t r = 0; r < out.size(); ++r) {
    const float* row = rows.data() + r * dim;
    double sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = query[j] - static_cast<double>(row[j]);
      sum += d * d;
    }
    out[r] = std::sqrt(sum);
  }
}

void l2_distances_parallel(std::span<const float> rows, std::size_t dim, std::span<const double> query,
                           std::span<double> out) {
  const auto count = static_cast<std::int64_t>(out.size());
  const float* base = rows.data();
  const double* q = query.data();
  double* dst = out.data();
#pragma omp parallel for schedule(static) if (count > 256)
  for (std::int64_t r = 0; r < count; ++r) {
    const float* row = base + static_cast<std::size_t>(r) * dim;
    double sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = q[j] - static_cast<double>(row[j]);
      sum += d * d;
    }
    dst[r] = std::sqrt(sum);
  }
}

}  // namespace kernels

FlatIndex::FlatIndex(std::size_t dim, bool normalize_flag) : dim_(dim), normalize_flag_(normalize_flag) {}

std::span<const float> FlatIndex::row(std::size_t i) const {
  return std::span<const float>(rows_).subspan(i * dim_, dim_);
}

embedding::EmbeddingVector FlatIndex::vector(std::size_t i) const {
  auto r = row(i);
  return embedding::EmbeddingVector(std::vector<double>(r.begin(), r.end()));
}

std::size_t FlatIndex::find(const std::string& key) const {
  auto it = positions_.find(key);
  return it == positions_.end() ? keys_.size() : it->second;
}

void FlatIndex::add(std::string key, const embedding::EmbeddingVector& vec) {
  if (vec.dim() != dim_) {
    throw DimensionMismatch("index dim is " + std::to_string(dim_) + ", vector for \"" + key + "\" has dim " +
                            std::to_string(vec.dim()));
  }
  if (!positions_.emplace(key, keys_.size()).second) {
    throw Error("duplicate index key \"" + key + "\"");
  }
  for (double v : vec.values()) {
    rows_.push_back(static_cast<float>(v));
  }
  keys_.push_back(std::move(key));
}

std::vector<Hit> FlatIndex::search(const embedding::EmbeddingVector& query, std::size_t k, Execution exec) const {
  std::vector<Hit> hits;
  if (keys_.empty() || k == 0) {
    return hits;
  }
  if (query.dim() != dim_) {
    throw DimensionMismatch("query dim " + std::to_string(query.dim()) + " does not match index dim " +
                            std::to_string(dim_));
  }
  std::vector<double> distances(keys_.size());
  if (exec == Execution::Parallel) {
    kernels::l2_distances_parallel(rows_, dim_, query.values(), distances);
  } else {
    kernels::l2_distances_serial(rows_, dim_, query.values(), distances);
  }

  std::vector<std::size_t> order(keys_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (distances[a] != distances[b]) {
                        return distances[a] < distances[b];
                      }
                      return keys_[a] < keys_[b];
                    });
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    hits.push_back({keys_[order[i]], distances[order[i]]});
  }
  return hits;
}

FlatIndex build_index(const std::vector<std::pair<std::string, embedding::EmbeddingVector>>& entries,
                      bool normalize_flag) {
  FlatIndex index(entries.empty() ? 0 : entries.front().second.dim(), normalize_flag);
  for (const auto& [key, vec] : entries) {
    index.add(key, vec);
  }
  return index;
}

namespace {

constexpr char kMagic[4] = {'C', 'B', 'V', 'X'};

class Writer {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes_.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
  }
  void put_f32(float value) { put(std::bit_cast<std::uint32_t>(value)); }
  void put_bytes(std::string_view s) { bytes_.append(s); }

  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  float get_f32() { return std::bit_cast<float>(get<std::uint32_t>()); }
  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw CorruptIndexError("index file is truncated");
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_index(const FlatIndex& index, const std::filesystem::path& path) {
  Writer w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put<std::uint16_t>(kIndexFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(index.dim()));
  w.put<std::uint64_t>(index.size());
  w.put<std::uint8_t>(index.normalize_flag() ? 1 : 0);
  for (const auto& key : index.keys()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(key.size()));
    w.put_bytes(key);
  }
  for (float v : index.data()) {
    w.put_f32(v);
  }
  w.put<std::uint32_t>(crc32_of(w.bytes()));
  io::write_file_atomic(path, w.bytes());
}

FlatIndex load_index(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  Reader r(bytes);
  if (r.get_bytes(4) != std::string_view(kMagic, 4)) {
    throw CorruptIndexError(path.string() + ": not a CBVX index file");
  }
  const auto version = r.get<std::uint16_t>();
  if (version != kIndexFormatVersion) {
    throw IndexVersionError(path.string() + ": unsupported index version " + std::to_string(version) +
                            " (expected " + std::to_string(kIndexFormatVersion) + ")");
  }
  if (bytes.size() < 4) {
    throw CorruptIndexError("index file is truncated");
  }
  const std::string_view payload(bytes.data(), bytes.size() - 4);
  Reader trailer(std::string_view(bytes).substr(bytes.size() - 4));
  if (crc32_of(payload) != trailer.get<std::uint32_t>()) {
    throw CorruptIndexError(path.string() + ": checksum mismatch");
  }

  const auto dim = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  const bool normalize_flag = r.get<std::uint8_t>() != 0;
  FlatIndex index(dim, normalize_flag);
  index.keys_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = r.get<std::uint32_t>();
    std::string key(r.get_bytes(len));
    if (!index.positions_.emplace(key, index.keys_.size()).second) {
      throw CorruptIndexError(path.string() + ": duplicate key \"" + key + "\"");
    }
    index.keys_.push_back(std::move(key));
  }
  index.rows_.resize(count * dim);
  for (float& v : index.rows_) {
    v = r.get_f32();
  }
  if (r.remaining() != 4) {
    throw CorruptIndexError(path.string() + ": trailing bytes after rows");
  }
  return index;
}

}  // namespace chunkbench::vecindex
