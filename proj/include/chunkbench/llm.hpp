#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include "chunkbench/error.hpp"

namespace chunkbench::chunkers {

// Token the model inserts between chunks while echoing the document.
inline constexpr std::string_view kChunkDelimiter = "<<<CHUNK>>>";

class LlmError : public Error {
 public:
  using Error::Error;
};

class LlmTimeout : public LlmError {
 public:
  using LlmError::LlmError;
};

struct LlmOptions {
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
};

class LlmClient {
 public:
  explicit LlmClient(LlmOptions options = {}) : options_(options) {}
  virtual ~LlmClient() = default;

  // Throws LlmError (or LlmTimeout) on failure.
  virtual std::string complete(const std::string& prompt) = 0;

  const LlmOptions& options() const noexcept { return options_; }

 private:
  LlmOptions options_;
};

std::string build_chunk_prompt(std::string_view document_text);

// Inverse of build_chunk_prompt; throws LlmError if the prompt does not carry
// a document block.
std::string extract_prompt_document(std::string_view prompt);

// Echoes the document, inserting the delimiter after every run of two or
// more newlines.
class ParagraphMockClient : public LlmClient {
 public:
  using LlmClient::LlmClient;
  std::string complete(const std::string& prompt) override;
};

// Echoes the document without any delimiter.
class EchoMockClient : public LlmClient {
 public:
  using LlmClient::LlmClient;
  std::string complete(const std::string& prompt) override;
};

// Always fails; exercises the fallback path.
class FailingMockClient : public LlmClient {
 public:
  using LlmClient::LlmClient;
  std::string complete(const std::string& prompt) override;
};

// "mock:paragraph", "mock:echo" or "mock:fail". Throws ConfigError otherwise.
std::unique_ptr<LlmClient> make_llm_client(std::string_view spec, LlmOptions options = {});

}  // namespace chunkbench::chunkers
