#include "chunkbench/llm.hpp"

#include <algorithm>

#include "chunkbench/chunkers.hpp"
#include "chunkbench/unicode.hpp"
#include "split_engine.hpp"

namespace chunkbench::chunkers {

namespace {

constexpr std::string_view kDocumentOpen = "<document>\n";
constexpr std::string_view kDocumentClose = "\n</document>";

std::vector<std::string> split_on_delimiter(std::string_view response) {
  std::vector<std::string> pieces;
  std::size_t begin = 0;
  while (true) {
    const std::size_t at = response.find(kChunkDelimiter, begin);
    if (at == std::string_view::npos) {
      pieces.emplace_back(response.substr(begin));
      return pieces;
    }
    pieces.emplace_back(response.substr(begin, at - begin));
    begin = at + kChunkDelimiter.size();
  }
}

std::u32string without_whitespace(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t ch : text) {
    if (!unicode::is_whitespace(ch)) {
      out.push_back(ch);
    }
  }
  return out;
}

// Maps the response pieces back onto the source. nullopt when the pieces do
// not reproduce the source modulo whitespace.
std::optional<std::vector<detail::Span>> locate_pieces(std::u32string_view source, const std::vector<bool>& safe,
                                                       const std::vector<std::string>& pieces) {
  std::vector<std::u32string> decoded;
  decoded.reserve(pieces.size());
  std::u32string joined;
  for (const auto& piece : pieces) {
    decoded.push_back(without_whitespace(unicode::to_nfc(unicode::decode_utf8(piece))));
    joined += decoded.back();
  }
  if (joined != without_whitespace(source)) {
    return std::nullopt;
  }

  std::vector<std::size_t> cuts;
  std::size_t cursor = 0;
  for (std::size_t p = 0; p + 1 < decoded.size(); ++p) {
    // In bounds: the pieces reproduce the source's non-whitespace codepoints.
    for (std::size_t matched = 0; matched < decoded[p].size(); ++matched) {
      while (unicode::is_whitespace(source[cursor])) {
        ++cursor;
      }
      ++cursor;
    }
    if (decoded[p].empty()) {
      continue;
    }
    std::size_t cut = cursor;
    while (cut < source.size() && !safe[cut]) {
      ++cut;
    }
    cuts.push_back(cut);
  }

  std::vector<detail::Span> spans;
  std::size_t prev = 0;
  cuts.push_back(source.size());
  for (std::size_t cut : cuts) {
    if (cut > prev) {
      spans.push_back({prev, cut});
      prev = cut;
    }
  }
  return spans;
}

}  // namespace

std::string build_chunk_prompt(std::string_view document_text) {
  std::string prompt =
      "Split the document below into semantically coherent chunks. Each chunk should hold one topic or "
      "one closely related group of instructions.\n"
      "Reproduce the document exactly as given, character for character, and insert the token ";
  prompt += kChunkDelimiter;
  prompt +=
      " between consecutive chunks. Do not add, remove, translate or reorder any text. Output only the "
      "document with the inserted tokens.\n\n";
  prompt += kDocumentOpen;
  prompt += document_text;
  prompt += kDocumentClose;
  return prompt;
}

std::string extract_prompt_document(std::string_view prompt) {
  const std::size_t open = prompt.find(kDocumentOpen);
  const std::size_t close = prompt.rfind(kDocumentClose);
  if (open == std::string_view::npos || close == std::string_view::npos || close < open + kDocumentOpen.size()) {
    throw LlmError("prompt does not contain a document block");
  }
  const std::size_t begin = open + kDocumentOpen.size();
  return std::string(prompt.substr(begin, close - begin));
}

std::string ParagraphMockClient::complete(const std::string& prompt) {
  const std::string doc = extract_prompt_document(prompt);
  std::string out;
  out.reserve(doc.size() + 64);
  std::size_t i = 0;
  while (i < doc.size()) {
    if (doc[i] != '\n') {
      out.push_back(doc[i++]);
      continue;
    }
    std::size_t run = i;
    while (run < doc.size() && doc[run] == '\n') {
      ++run;
    }
    out.append(doc, i, run - i);
    if (run - i >= 2 && run < doc.size()) {
      out += kChunkDelimiter;
    }
    i = run;
  }
  return out;
}

std::string EchoMockClient::complete(const std::string& prompt) { return extract_prompt_document(prompt); }

std::string FailingMockClient::complete(const std::string&) { throw LlmError("mock:fail always fails"); }

std::unique_ptr<LlmClient> make_llm_client(std::string_view spec, LlmOptions options) {
  if (spec == "mock:paragraph") {
    return std::make_unique<ParagraphMockClient>(options);
  }
  if (spec == "mock:echo") {
    return std::make_unique<EchoMockClient>(options);
  }
  if (spec == "mock:fail") {
    return std::make_unique<FailingMockClient>(options);
  }
  throw ConfigError("unknown LLM client \"" + std::string(spec) +
                    "\" (expected mock:paragraph, mock:echo or mock:fail)");
}

std::vector<Chunk> chunk_llm(const corpus::Document& doc, LlmClient& client, const ChunkConfig& cfg) {
  cfg.validate();
  const std::u32string text = unicode::decode_utf8(doc.text);
  if (text.empty()) {
    return {};
  }

  const std::string prompt = build_chunk_prompt(doc.text);
  std::optional<std::string> response;
  const int attempts = 1 + std::max(0, client.options().retries);
  for (int attempt = 0; attempt < attempts && !response; ++attempt) {
    try {
      response = client.complete(prompt);
    } catch (const LlmError&) {
      // retried, then falls back below
    }
  }

  if (response && !response->empty()) {
    const std::vector<bool> safe = unicode::safe_boundaries(text);
    if (auto spans = locate_pieces(text, safe, split_on_delimiter(*response))) {
      return detail::spans_to_chunks(doc.id, text, *spans, ChunkMethod::LlmBased);
    }
  }

  std::vector<Chunk> chunks = chunk_recursive(doc, cfg);
  for (Chunk& chunk : chunks) {
    chunk.method = ChunkMethod::LlmBased;
    chunk.fallback = true;
  }
  return chunks;
}

}  // namespace chunkbench::chunkers
