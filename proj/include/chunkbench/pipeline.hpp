#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "chunkbench/chunkers.hpp"
#include "chunkbench/embedding.hpp"
#include "chunkbench/error.hpp"
#include "chunkbench/evaluation.hpp"
#include "chunkbench/report.hpp"

namespace chunkbench::pipeline {

// Raised when a stage would overwrite existing outputs without force.
class OutputExists : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class WorkdirLocked : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path qa;
  std::filesystem::path workdir = "work";
  embedding::ProviderConfig provider;
  chunkers::ChunkConfig chunk;
  std::size_t k_retrieve = 5;
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  std::vector<chunkers::ChunkMethod> methods = {chunkers::ChunkMethod::LlmBased, chunkers::ChunkMethod::KhmerAware,
                                                chunkers::ChunkMethod::Recursive,
                                                chunkers::ChunkMethod::SentenceBased};
  std::string llm = "mock:paragraph";
  evaluation::Pairing pairing = evaluation::Pairing::PerQuestion;

  // Throws ConfigError.
  void validate() const;
};

// JSON config; relative corpus/qa/workdir paths resolve against the config
// file's directory. Unknown methods raise ConfigError naming them.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(std::string_view text, const std::filesystem::path& base_dir = {});

// Workdir layout.
std::filesystem::path chunks_path(const std::filesystem::path& workdir, chunkers::ChunkMethod method);
std::filesystem::path index_path(const std::filesystem::path& workdir, chunkers::ChunkMethod method);
std::filesystem::path records_path(const std::filesystem::path& workdir, chunkers::ChunkMethod method);
std::filesystem::path embeddings_path(const std::filesystem::path& workdir);
std::filesystem::path report_path(const std::filesystem::path& workdir, report::Format format);

std::string chunks_to_jsonl(const std::vector<chunkers::Chunk>& chunks);
std::vector<chunkers::Chunk> chunks_from_jsonl(std::string_view text);

// Exclusive lock file in the workdir, removed on destruction.
class WorkdirLock {
 public:
  explicit WorkdirLock(const std::filesystem::path& workdir);
  ~WorkdirLock();
  WorkdirLock(const WorkdirLock&) = delete;
  WorkdirLock& operator=(const WorkdirLock&) = delete;

 private:
  std::filesystem::path path_;
};

std::vector<chunkers::Chunk> chunk_corpus(const std::vector<corpus::Document>& docs, chunkers::ChunkMethod method,
                                          const RunConfig& cfg);

// Writes one chunks file per method; returns per-method counts.
std::map<chunkers::ChunkMethod, std::size_t> run_chunk_stage(const RunConfig& cfg, bool force);

// Embeds every chunk, question and answer into the workdir cache; returns
// the number of cached vectors.
std::size_t run_embed_stage(const RunConfig& cfg);

// Builds and saves one CBVX index per method.
void run_index_stage(const RunConfig& cfg, bool force);

// Scores every method from its chunk files and builds the report.
report::Report run_evaluation(const RunConfig& cfg);

// Writes report.<ext> for each format and records/<method>.jsonl, each via
// temp file + rename.
void write_report_files(const report::Report& report, const std::filesystem::path& workdir,
                        const std::vector<report::Format>& formats);

}  // namespace chunkbench::pipeline
