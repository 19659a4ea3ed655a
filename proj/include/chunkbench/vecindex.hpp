#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chunkbench/embedding.hpp"
#include "chunkbench/error.hpp"

namespace chunkbench::vecindex {

class IndexVersionError : public Error {
 public:
  using Error::Error;
};

class CorruptIndexError : public Error {
 public:
  using Error::Error;
};

enum class Execution { Serial, Parallel };

struct Hit {
  std::string key;
  double distance = 0.0;

  bool operator==(const Hit&) const = default;
};

// Exact flat L2 index. Rows are stored as 32-bit floats in insertion order.
class FlatIndex {
 public:
  explicit FlatIndex(std::size_t dim = 0, bool normalize_flag = false);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool normalize_flag() const noexcept { return normalize_flag_; }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  std::span<const float> row(std::size_t i) const;
  // Row i widened to double.
  embedding::EmbeddingVector vector(std::size_t i) const;
  // Position of key, or size() when absent.
  std::size_t find(const std::string& key) const;

  // Throws DimensionMismatch or Error on a duplicate key.
  void add(std::string key, const embedding::EmbeddingVector& vec);

  // min(k, size()) hits, ascending by distance, ties by key.
  std::vector<Hit> search(const embedding::EmbeddingVector& query, std::size_t k,
                          Execution exec = Execution::Parallel) const;

  const std::vector<float>& data() const noexcept { return rows_; }

 private:
  friend FlatIndex load_index(const std::filesystem::path& path);

  std::size_t dim_;
  bool normalize_flag_;
  std::vector<std::string> keys_;
  std::vector<float> rows_;
  std::unordered_map<std::string, std::size_t> positions_;
};

// All vectors must share one dim; an empty entry list gives an empty index of
// dim 0 that answers every search with no hits.
FlatIndex build_index(const std::vector<std::pair<std::string, embedding::EmbeddingVector>>& entries,
                      bool normalize_flag);

// CBVX format: magic "CBVX", u16 version, u32 dim, u64 count, u8 normalize
// flag, keys (u32 length + UTF-8), rows (f32), u32 CRC32 of everything
// before it. All integers and floats little-endian.
inline constexpr std::uint16_t kIndexFormatVersion = 1;
void save_index(const FlatIndex& index, const std::filesystem::path& path);
FlatIndex load_index(const std::filesystem::path& path);

namespace kernels {

// out[i] = ||query - row_i||_2, accumulated in double in dimension order.
void l2_distances_serial(std::span<const float> rows, std::size_t dim, std::span<const double> query,
                         std::span<double> out);
// Same arithmetic per row; rows are distributed over OpenMP threads.
void l2_distances_parallel(std::span<const float> rows, std::size_t dim, std::span<const double> query,
                           std::span<double> out);

}  // namespace kernels

}  // namespace chunkbench::vecindex
