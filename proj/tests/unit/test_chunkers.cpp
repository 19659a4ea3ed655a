#include <gtest/gtest.h>

#include "chunkbench/chunkers.hpp"
#include "chunkbench/error.hpp"
#include "chunkbench/unicode.hpp"
#include "support/chunk_properties.hpp"
#include "support/oracles.hpp"

using namespace chunkbench;
using namespace chunkbench::chunkers;

namespace {

corpus::Document doc_of(std::string text) { return {"d", std::move(text), "test"}; }

std::vector<std::string> texts(const std::vector<Chunk>& chunks) {
  std::vector<std::string> out;
  for (const auto& c : chunks) {
    out.push_back(c.text);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> spans(const std::vector<Chunk>& chunks) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& c : chunks) {
    out.emplace_back(c.start, c.end);
  }
  return out;
}

std::string numbered_sentences(int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) {
    s += (i > 1 ? " S" : "S") + std::to_string(i) + ".";
  }
  return s;
}

}  // namespace

TEST(ChunkConfig, Validation) {
  ChunkConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.max_chars = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ChunkConfig{};
  cfg.overlap_chars = cfg.max_chars;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = ChunkConfig{};
  cfg.sentence_overlap = cfg.sentences_per_chunk;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ChunkMethod, Identifiers) {
  for (auto m : all_methods()) {
    EXPECT_EQ(parse_method(method_id(m)), m);
  }
  EXPECT_FALSE(parse_method("semantic").has_value());
  EXPECT_EQ(method_label(ChunkMethod::KhmerAware), "Khmer-Aware");
}

TEST(Recursive, HelloWorld) {
  ChunkConfig cfg;
  cfg.max_chars = 15;
  cfg.overlap_chars = 0;
  const auto chunks = chunk_recursive(doc_of("Hello world. How are you?"), cfg);
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"Hello world.", "How are you?"}));
}

TEST(Recursive, ShortTextIsOneTrimmedChunk) {
  const auto chunks = chunk_recursive(doc_of("  short text\n"), ChunkConfig{});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, "short text");
  EXPECT_EQ(chunks[0].start, 0u);
  EXPECT_EQ(chunks[0].end, 13u);
}

TEST(Recursive, EmptyAndWhitespaceDocuments) {
  EXPECT_TRUE(chunk_recursive(doc_of(""), ChunkConfig{}).empty());
  EXPECT_TRUE(chunk_recursive(doc_of(" \n\n "), ChunkConfig{}).empty());
}

TEST(Recursive, SevenHundredCodepointsAgainstSimulation) {
  const std::string text(700, 'x');
  const auto chunks = chunk_recursive(doc_of(text), ChunkConfig{});
  const auto expected = testsupport::fixed_window_simulation(700, 300, 50);
  ASSERT_EQ(expected, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 300}, {250, 550}, {500, 700}}));
  EXPECT_EQ(spans(chunks), expected);
}

TEST(Recursive, SevenHundredCodepointsOfClustersNudgedToBoundaries) {
  // 175 four-codepoint clusters: ក + coeng + ស + vowel sign AA.
  std::u32string text;
  for (int i = 0; i < 175; ++i) {
    text += U"ក្សា";
  }
  ASSERT_EQ(text.size(), 700u);
  const auto chunks = chunk_recursive(doc_of(unicode::encode_utf8(text)), ChunkConfig{});
  const auto expected = testsupport::piece_window_simulation(std::vector<std::size_t>(175, 4), 300, 50);
  ASSERT_EQ(expected, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 300}, {252, 552}, {504, 700}}));
  EXPECT_EQ(spans(chunks), expected);
  EXPECT_EQ(testsupport::check_grapheme_safety(text, chunks), "");
}

TEST(Recursive, MixedWordsAgainstSimulation) {
  // Words of varying width separated by single spaces; the space stays with
  // the preceding word.
  std::string text;
  std::vector<std::size_t> widths;
  for (int i = 0; i < 80; ++i) {
    const std::size_t w = 3 + (i * 7) % 11;
    text += std::string(w, static_cast<char>('a' + i % 26));
    if (i + 1 < 80) {
      text += ' ';
      widths.push_back(w + 1);
    } else {
      widths.push_back(w);
    }
  }
  ChunkConfig cfg;
  cfg.max_chars = 60;
  cfg.overlap_chars = 15;
  const auto chunks = chunk_recursive(doc_of(text), cfg);
  EXPECT_EQ(spans(chunks), testsupport::piece_window_simulation(widths, 60, 15));
}

TEST(Recursive, SeparatorStaysWithPrecedingPiece) {
  ChunkConfig cfg;
  cfg.max_chars = 10;
  cfg.overlap_chars = 0;
  const auto chunks = chunk_recursive(doc_of("aaaa\n\nbbbbbbb"), cfg);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].start, 0u);
  EXPECT_EQ(chunks[0].end, 6u);
  EXPECT_EQ(chunks[0].text, "aaaa");
  EXPECT_EQ(chunks[1].start, 6u);
  EXPECT_EQ(chunks[1].text, "bbbbbbb");
}

TEST(Recursive, OversizedClusterFallsBackToCodepoints) {
  std::u32string text = U"a";
  text.append(20, U'\u0301');
  ChunkConfig cfg;
  cfg.max_chars = 8;
  cfg.overlap_chars = 0;
  const auto chunks = chunk_recursive(doc_of(unicode::encode_utf8(text)), cfg);
  EXPECT_EQ(testsupport::check_bound(chunks, 8), "");
  EXPECT_EQ(testsupport::check_coverage(text, chunks), "");
}

TEST(KhmerAware, SentenceMarkersWhenBudgetForcesSplit) {
  ChunkConfig cfg;
  cfg.khmer_aware_max_chars = 20;
  const auto chunks = chunk_khmer_aware(doc_of("ដាំស្វាយចន្ទី។ ថែរក្សាសួន៕"), cfg);
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"ដាំស្វាយចន្ទី។", "ថែរក្សាសួន៕"}));
}

TEST(KhmerAware, FitsBudgetIsOneChunk) {
  const std::string text = "ដាំស្វាយចន្ទីនៅរដូវវស្សា";
  const auto chunks = chunk_khmer_aware(doc_of(text), ChunkConfig{});
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].text, text);
}

TEST(KhmerAware, TwoParagraphsHandTrace) {
  // P1 has 26 codepoints, P2 has 20. With a 30-codepoint budget the "\n\n"
  // level yields pieces [0,28) and [28,48), which cannot merge (28+20 > 30),
  // so each paragraph is one chunk. The first piece keeps its separator.
  const std::u32string p1 = U"ដាំស្វាយចន្ទី។ ថែរក្សាសួន៕";
  const std::u32string p2 = U"ស្រូវត្រូវការទឹក។ ទេ";
  ASSERT_EQ(p1.size(), 26u);
  ASSERT_EQ(p2.size(), 20u);
  ChunkConfig cfg;
  cfg.khmer_aware_max_chars = 30;
  const auto chunks = chunk_khmer_aware(doc_of(unicode::encode_utf8(p1 + U"\n\n" + p2)), cfg);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(spans(chunks), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 28}, {28, 48}}));
  EXPECT_EQ(chunks[0].text, unicode::encode_utf8(p1));
  EXPECT_EQ(chunks[1].text, unicode::encode_utf8(p2));
}

TEST(KhmerAware, ZwspIsAWordBoundary) {
  ChunkConfig cfg;
  cfg.khmer_aware_max_chars = 6;
  const auto chunks = chunk_khmer_aware(doc_of("កខគឃង\u200Bចឆជឈញ"), cfg);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].end, 6u);
}

TEST(SplitSentences, Markers) {
  const auto s = split_sentences(U"A. B! C? ក។ ខ៕ 3.14 D");
  std::vector<std::u32string> parts;
  const std::u32string text = U"A. B! C? ក។ ខ៕ 3.14 D";
  for (auto [b, e] : s) {
    parts.push_back(text.substr(b, e - b));
  }
  ASSERT_EQ(parts.size(), 6u);
  EXPECT_EQ(parts[0], U"A.");
  EXPECT_EQ(parts[5], U" 3.14 D");
}

TEST(Sentence, EightSentences) {
  const auto chunks = chunk_sentence(doc_of(numbered_sentences(8)), ChunkConfig{});
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"S1. S2. S3. S4. S5.", "S5. S6. S7. S8."}));
}

TEST(Sentence, ThreeSentences) {
  const auto chunks = chunk_sentence(doc_of(numbered_sentences(3)), ChunkConfig{});
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"S1. S2. S3."}));
}

TEST(Sentence, TenSentencesAgainstWindowingOracle) {
  const auto windows = testsupport::sentence_windows(10, 5, 1);
  ASSERT_EQ(windows, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 4}, {4, 8}, {8, 9}}));
  std::vector<std::string> expected;
  for (auto [first, last] : windows) {
    std::string s;
    for (std::size_t i = first; i <= last; ++i) {
      s += (i > first ? " S" : "S") + std::to_string(i + 1) + ".";
    }
    expected.push_back(s);
  }
  EXPECT_EQ(texts(chunk_sentence(doc_of(numbered_sentences(10)), ChunkConfig{})), expected);
}

TEST(Sentence, WindowingOracleAcrossSizes) {
  for (std::size_t n = 1; n <= 23; ++n) {
    for (std::size_t per = 1; per <= 6; ++per) {
      for (std::size_t ov = 0; ov < per; ++ov) {
        ChunkConfig cfg;
        cfg.sentences_per_chunk = per;
        cfg.sentence_overlap = ov;
        const auto chunks = chunk_sentence(doc_of(numbered_sentences(static_cast<int>(n))), cfg);
        EXPECT_EQ(chunks.size(), testsupport::sentence_windows(n, per, ov).size())
            << "n=" << n << " per=" << per << " ov=" << ov;
      }
    }
  }
}

TEST(ChunkDocument, LlmNeedsClient) {
  EXPECT_THROW(chunk_document(ChunkMethod::LlmBased, doc_of("x"), ChunkConfig{}), ConfigError);
}

TEST(ChunkJson, KeyIsDocAndSeq) {
  Chunk c;
  c.doc_id = "doc";
  c.seq = 3;
  EXPECT_EQ(c.key(), "doc#3");
}
