#include "split_engine.hpp"

#include <deque>

#include "chunkbench/unicode.hpp"

namespace chunkbench::chunkers::detail {

SplitEngine::SplitEngine(std::u32string_view text) : text_(text), safe_(unicode::safe_boundaries(text)) {}

std::vector<Span> SplitEngine::split(const std::vector<SeparatorLevel>& levels, std::size_t max_chars,
                                     std::size_t overlap_chars) const {
  std::vector<Span> out;
  if (text_.empty()) {
    return out;
  }
  split_span({0, text_.size()}, levels, 0, max_chars, overlap_chars, out);
  return out;
}

std::vector<std::size_t> SplitEngine::cut_points(Span span, const SeparatorLevel& level) const {
  std::vector<std::size_t> cuts;
  for (std::size_t pos = span.begin; pos < span.end; ++pos) {
    for (const auto& sep : level) {
      if (sep.empty()) {
        if (pos > span.begin && safe_[pos]) {
          cuts.push_back(pos);
        }
        break;
      }
      if (text_.compare(pos, sep.size(), sep) != 0) {
        continue;
      }
      const std::size_t cut = pos + sep.size();
      if (cut < span.end && cut <= text_.size() && safe_[cut]) {
        cuts.push_back(cut);
        pos = cut - 1;
        break;
      }
    }
  }
  return cuts;
}

void SplitEngine::split_span(Span span, const std::vector<SeparatorLevel>& levels, std::size_t level,
                             std::size_t max_chars, std::size_t overlap_chars, std::vector<Span>& out) const {
  if (span.size() <= max_chars) {
    out.push_back(span);
    return;
  }

  std::vector<std::size_t> cuts;
  std::size_t chosen = level;
  for (; chosen < levels.size(); ++chosen) {
    cuts = cut_points(span, levels[chosen]);
    if (!cuts.empty()) {
      break;
    }
  }

  if (cuts.empty()) {
    // One grapheme cluster longer than max_chars: split by codepoint.
    for (std::size_t b = span.begin; b < span.end; b += max_chars) {
      out.push_back({b, std::min(b + max_chars, span.end)});
    }
    return;
  }

  std::vector<Span> fitting;
  std::size_t prev = span.begin;
  cuts.push_back(span.end);
  for (std::size_t cut : cuts) {
    Span piece{prev, cut};
    prev = cut;
    if (piece.size() <= max_chars) {
      fitting.push_back(piece);
      continue;
    }
    merge(fitting, max_chars, overlap_chars, out);
    fitting.clear();
    split_span(piece, levels, chosen + 1, max_chars, overlap_chars, out);
  }
  merge(fitting, max_chars, overlap_chars, out);
}

void SplitEngine::merge(const std::vector<Span>& pieces, std::size_t max_chars, std::size_t overlap_chars,
                        std::vector<Span>& out) {
  std::deque<Span> current;
  std::size_t total = 0;
  for (const Span& piece : pieces) {
    const std::size_t len = piece.size();
    if (total + len > max_chars && !current.empty()) {
      out.push_back({current.front().begin, current.back().end});
      while (total > overlap_chars || (total + len > max_chars && total > 0)) {
        total -= current.front().size();
        current.pop_front();
      }
    }
    current.push_back(piece);
    total += len;
  }
  if (!current.empty()) {
    out.push_back({current.front().begin, current.back().end});
  }
}

Span trim_span(std::u32string_view text, Span span) {
  std::size_t begin = span.begin;
  std::size_t end = span.end;
  while (begin < end && unicode::is_whitespace(text[begin])) {
    if (begin + 1 < end && unicode::is_mark(text[begin + 1])) {
      break;
    }
    ++begin;
  }
  while (end > begin && unicode::is_whitespace(text[end - 1])) {
    --end;
  }
  return {begin, end};
}

std::vector<Chunk> spans_to_chunks(const std::string& doc_id, std::u32string_view text,
                                   const std::vector<Span>& spans, ChunkMethod method) {
  std::vector<Chunk> chunks;
  chunks.reserve(spans.size());
  for (const Span& span : spans) {
    const Span trimmed = trim_span(text, span);
    if (trimmed.size() == 0) {
      continue;
    }
    Chunk chunk;
    chunk.doc_id = doc_id;
    chunk.seq = chunks.size();
    chunk.text = unicode::encode_utf8(text.substr(trimmed.begin, trimmed.size()));
    chunk.start = span.begin;
    chunk.end = span.end;
    chunk.method = method;
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace chunkbench::chunkers::detail
