#include "chunkbench/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <set>

#include <json.hpp>

#include "chunkbench/io.hpp"
#include "chunkbench/llm.hpp"
#include "chunkbench/vecindex.hpp"

namespace chunkbench::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void validate_except_provider(const RunConfig& cfg) {
  const auto& methods = cfg.methods;
  if (methods.empty()) {
    throw ConfigError("config: at least one method is required");
  }
  std::set<chunkers::ChunkMethod> seen;
  for (auto m : methods) {
    if (!seen.insert(m).second) {
      throw ConfigError("config: method \"" + std::string(chunkers::method_id(m)) + "\" listed twice");
    }
  }
  if (cfg.k_retrieve < 1) {
    throw ConfigError("config: k_retrieve must be >= 1");
  }
  if (cfg.folds < 1) {
    throw ConfigError("config: folds must be >= 1");
  }
  cfg.chunk.validate();
}

}  // namespace

void RunConfig::validate() const {
  validate_except_provider(*this);
  provider.validate();
}

namespace {

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    out = it->get<T>();
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError(where + ": unknown key \"" + key + "\"");
    }
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  if (p.empty() || p.is_absolute() || base.empty()) {
    return p;
  }
  return base / p;
}

}  // namespace

RunConfig run_config_from_json(std::string_view text, const fs::path& base_dir) {
  RunConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  try {
    reject_unknown(j,
                   {"corpus", "qa", "workdir", "k_retrieve", "folds", "seed", "provider", "methods", "chunk", "llm",
                    "pairing"},
                   "config");
    if (j.contains("corpus")) {
      cfg.corpus = resolve(base_dir, j["corpus"].get<std::string>());
    }
    if (j.contains("qa")) {
      cfg.qa = resolve(base_dir, j["qa"].get<std::string>());
    }
    if (j.contains("workdir")) {
      cfg.workdir = resolve(base_dir, j["workdir"].get<std::string>());
    }
    read_if(j, "k_retrieve", cfg.k_retrieve);
    read_if(j, "folds", cfg.folds);
    read_if(j, "seed", cfg.seed);
    read_if(j, "llm", cfg.llm);
    if (j.contains("pairing")) {
      const auto id = j["pairing"].get<std::string>();
      auto p = evaluation::parse_pairing(id);
      if (!p) {
        throw ConfigError("config: unknown pairing \"" + id + "\" (expected per_question or per_fold)");
      }
      cfg.pairing = *p;
    }
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j["methods"]) {
        const auto id = m.get<std::string>();
        auto method = chunkers::parse_method(id);
        if (!method) {
          throw ConfigError("config: unknown method \"" + id + "\" (expected recursive, khmer_aware, sentence or llm)");
        }
        cfg.methods.push_back(*method);
      }
    }
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      reject_unknown(p, {"kind", "dim", "endpoint", "normalize", "batch_size", "retries", "timeout_ms"},
                     "config.provider");
      if (p.contains("kind")) {
        const auto kind = p["kind"].get<std::string>();
        if (kind == "deterministic") {
          cfg.provider.kind = embedding::ProviderKind::Deterministic;
        } else if (kind == "remote") {
          cfg.provider.kind = embedding::ProviderKind::Remote;
        } else {
          throw ConfigError("config.provider: unknown kind \"" + kind + "\"");
        }
      }
      read_if(p, "dim", cfg.provider.dim);
      read_if(p, "endpoint", cfg.provider.endpoint);
      read_if(p, "normalize", cfg.provider.normalize);
      read_if(p, "batch_size", cfg.provider.batch_size);
      read_if(p, "retries", cfg.provider.retries);
      if (p.contains("timeout_ms")) {
        cfg.provider.timeout = std::chrono::milliseconds(p["timeout_ms"].get<std::int64_t>());
      }
    }
    if (j.contains("chunk")) {
      const auto& c = j["chunk"];
      reject_unknown(c,
                     {"max_chars", "overlap_chars", "sentences_per_chunk", "sentence_overlap", "khmer_aware_max_chars",
                      "separators"},
                     "config.chunk");
      read_if(c, "max_chars", cfg.chunk.max_chars);
      read_if(c, "overlap_chars", cfg.chunk.overlap_chars);
      read_if(c, "sentences_per_chunk", cfg.chunk.sentences_per_chunk);
      read_if(c, "sentence_overlap", cfg.chunk.sentence_overlap);
      read_if(c, "khmer_aware_max_chars", cfg.chunk.khmer_aware_max_chars);
      read_if(c, "separators", cfg.chunk.separators);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a field of the wrong type: ") + e.what());
  }
  validate_except_provider(cfg);
  // A remote endpoint may still arrive from the command line.
  if (cfg.provider.kind == embedding::ProviderKind::Deterministic || !cfg.provider.endpoint.empty()) {
    cfg.provider.validate();
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return run_config_from_json(text, path.parent_path());
}

fs::path chunks_path(const fs::path& workdir, chunkers::ChunkMethod method) {
  return workdir / "chunks" / (std::string(chunkers::method_id(method)) + ".jsonl");
}

fs::path index_path(const fs::path& workdir, chunkers::ChunkMethod method) {
  return workdir / "index" / (std::string(chunkers::method_id(method)) + ".cbvx");
}

fs::path records_path(const fs::path& workdir, chunkers::ChunkMethod method) {
  return workdir / "records" / (std::string(chunkers::method_id(method)) + ".jsonl");
}

fs::path embeddings_path(const fs::path& workdir) { return workdir / "embeddings.jsonl"; }

fs::path report_path(const fs::path& workdir, report::Format format) {
  return workdir / ("report." + std::string(report::format_extension(format)));
}

std::string chunks_to_jsonl(const std::vector<chunkers::Chunk>& chunks) {
  std::string out;
  for (const auto& c : chunks) {
    nlohmann::ordered_json obj;
    obj["doc_id"] = c.doc_id;
    obj["seq"] = c.seq;
    obj["method"] = std::string(chunkers::method_id(c.method));
    obj["text"] = c.text;
    obj["start"] = c.start;
    obj["end"] = c.end;
    if (c.fallback) {
      obj["fallback"] = true;
    }
    out += obj.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<chunkers::Chunk> chunks_from_jsonl(std::string_view text) {
  std::vector<chunkers::Chunk> out;
  std::size_t begin = 0;
  std::size_t number = 0;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    ++number;
    const std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    if (line.empty()) {
      continue;
    }
    try {
      const auto obj = json::parse(line);
      chunkers::Chunk c;
      c.doc_id = obj.at("doc_id").get<std::string>();
      c.seq = obj.at("seq").get<std::size_t>();
      const auto method = obj.at("method").get<std::string>();
      auto m = chunkers::parse_method(method);
      if (!m) {
        throw ParseError("chunks", number, "unknown method \"" + method + "\"");
      }
      c.method = *m;
      c.text = obj.at("text").get<std::string>();
      c.start = obj.at("start").get<std::size_t>();
      c.end = obj.at("end").get<std::size_t>();
      c.fallback = obj.value("fallback", false);
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw ParseError("chunks", number, e.what());
    }
  }
  return out;
}

WorkdirLock::WorkdirLock(const fs::path& workdir) : path_(workdir / ".chunkbench.lock") {
  std::error_code ec;
  fs::create_directories(workdir, ec);
  if (ec) {
    throw IoError("cannot create workdir " + workdir.string() + ": " + ec.message());
  }
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw WorkdirLocked("workdir " + workdir.string() + " is locked by another run (remove " + path_.string() +
                        " if stale)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkdirLock::~WorkdirLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::vector<chunkers::Chunk> chunk_corpus(const std::vector<corpus::Document>& docs, chunkers::ChunkMethod method,
                                          const RunConfig& cfg) {
  std::unique_ptr<chunkers::LlmClient> client;
  if (method == chunkers::ChunkMethod::LlmBased) {
    client = chunkers::make_llm_client(cfg.llm);
  }
  std::vector<chunkers::Chunk> all;
  for (const auto& doc : docs) {
    auto chunks = chunkers::chunk_document(method, doc, cfg.chunk, client.get());
    all.insert(all.end(), std::make_move_iterator(chunks.begin()), std::make_move_iterator(chunks.end()));
  }
  return all;
}

namespace {

void ensure_parent(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) {
    throw IoError("cannot create " + p.parent_path().string() + ": " + ec.message());
  }
}

std::vector<chunkers::Chunk> read_chunks(const RunConfig& cfg, chunkers::ChunkMethod method) {
  const auto path = chunks_path(cfg.workdir, method);
  if (!fs::exists(path)) {
    throw IoError("missing chunk file " + path.string() + " (run the chunk command first)");
  }
  return chunks_from_jsonl(io::read_file(path));
}

std::vector<corpus::QAPair> read_qa(const RunConfig& cfg) {
  if (cfg.qa.empty()) {
    throw ConfigError("config: no QA file given");
  }
  return corpus::load_qa(cfg.qa);
}

}  // namespace

std::map<chunkers::ChunkMethod, std::size_t> run_chunk_stage(const RunConfig& cfg, bool force) {
  cfg.validate();
  if (cfg.corpus.empty()) {
    throw ConfigError("config: no corpus file given");
  }
  if (!force) {
    for (auto m : cfg.methods) {
      if (fs::exists(chunks_path(cfg.workdir, m))) {
        throw OutputExists("chunk output " + chunks_path(cfg.workdir, m).string() +
                           " already exists (use --force to overwrite)");
      }
    }
  }
  const auto docs = corpus::load_corpus(cfg.corpus);
  std::map<chunkers::ChunkMethod, std::size_t> counts;
  for (auto m : cfg.methods) {
    const auto chunks = chunk_corpus(docs, m, cfg);
    const auto path = chunks_path(cfg.workdir, m);
    ensure_parent(path);
    io::write_file_atomic(path, chunks_to_jsonl(chunks));
    counts[m] = chunks.size();
  }
  return counts;
}

std::size_t run_embed_stage(const RunConfig& cfg) {
  cfg.validate();
  auto provider = embedding::make_provider(cfg.provider);
  auto cache = embedding::EmbeddingCache::load(embeddings_path(cfg.workdir));
  embedding::CachedProvider cached(*provider, cache);

  std::vector<std::string> texts;
  for (auto m : cfg.methods) {
    for (auto& c : read_chunks(cfg, m)) {
      texts.push_back(std::move(c.text));
    }
  }
  for (const auto& qa : read_qa(cfg)) {
    texts.push_back(qa.question);
    texts.push_back(qa.answer);
  }
  cached.embed(texts);
  cache.save(embeddings_path(cfg.workdir));
  return cache.size();
}

void run_index_stage(const RunConfig& cfg, bool force) {
  cfg.validate();
  if (!force) {
    for (auto m : cfg.methods) {
      if (fs::exists(index_path(cfg.workdir, m))) {
        throw OutputExists("index " + index_path(cfg.workdir, m).string() + " already exists (use --force to overwrite)");
      }
    }
  }
  auto provider = embedding::make_provider(cfg.provider);
  auto cache = embedding::EmbeddingCache::load(embeddings_path(cfg.workdir));
  embedding::CachedProvider cached(*provider, cache);
  for (auto m : cfg.methods) {
    const auto index = evaluation::index_chunks(read_chunks(cfg, m), cached);
    const auto path = index_path(cfg.workdir, m);
    ensure_parent(path);
    vecindex::save_index(index, path);
  }
  cache.save(embeddings_path(cfg.workdir));
}

report::Report run_evaluation(const RunConfig& cfg) {
  cfg.validate();
  const auto qa = read_qa(cfg);
  if (cfg.folds > qa.size()) {
    throw ConfigError("config: folds (" + std::to_string(cfg.folds) + ") exceeds the number of QA pairs (" +
                      std::to_string(qa.size()) + ")");
  }
  const auto folds = evaluation::kfold_split(qa.size(), cfg.folds, cfg.seed);

  auto provider = embedding::make_provider(cfg.provider);
  auto cache = embedding::EmbeddingCache::load(embeddings_path(cfg.workdir));
  embedding::CachedProvider cached(*provider, cache);

  report::Report rep;
  rep.run.k_retrieve = cfg.k_retrieve;
  rep.run.folds = cfg.folds;
  rep.run.seed = cfg.seed;
  rep.run.provider = std::string(embedding::kind_name(cfg.provider.kind));
  rep.run.dim = cfg.provider.dim;
  rep.run.normalize = cfg.provider.normalize;
  rep.run.pairing = cfg.pairing;
  rep.run.llm = cfg.llm;

  for (auto m : cfg.methods) {
    const auto chunks = read_chunks(cfg, m);
    auto records = evaluation::evaluate_method(chunks, qa, cached, cfg.k_retrieve);
    rep.summaries.push_back(evaluation::summarize(m, chunks.size(), records, folds));
    rep.records.push_back({m, std::move(records)});
  }

  const bool can_test = cfg.pairing == evaluation::Pairing::PerQuestion ? qa.size() >= 2 : cfg.folds >= 2;
  if (can_test) {
    for (auto metric : evaluation::kMetrics) {
      for (std::size_t a = 0; a < rep.records.size(); ++a) {
        for (std::size_t b = a + 1; b < rep.records.size(); ++b) {
          rep.tests.push_back(evaluation::compare_methods(rep.records[a].method, rep.records[a].records,
                                                          rep.records[b].method, rep.records[b].records, metric,
                                                          cfg.pairing, folds));
        }
      }
    }
  }
  cache.save(embeddings_path(cfg.workdir));
  return rep;
}

void write_report_files(const report::Report& rep, const fs::path& workdir,
                        const std::vector<report::Format>& formats) {
  // Render everything first so a failure cannot leave a partial set.
  std::vector<std::pair<fs::path, std::string>> outputs;
  for (const auto& mr : rep.records) {
    outputs.emplace_back(records_path(workdir, mr.method), metrics::to_jsonl(mr.records));
  }
  for (auto f : formats) {
    outputs.emplace_back(report_path(workdir, f), report::render_report(rep, f));
  }
  for (const auto& [path, contents] : outputs) {
    ensure_parent(path);
    io::write_file_atomic(path, contents);
  }
}

}  // namespace chunkbench::pipeline
