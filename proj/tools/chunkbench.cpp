// chunkbench: chunk a corpus with four strategies, embed and index the chunks,
// and score each strategy against QA pairs under k-fold aggregation.
//
//   chunkbench --config run.json chunk
//   chunkbench --config run.json evaluate --all
//   chunkbench --workdir work compare --a recursive --b sentence --metric avg_l2
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime, I/O or
// provider error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chunkbench/error.hpp"
#include "chunkbench/io.hpp"
#include "chunkbench/pipeline.hpp"
#include "chunkbench/report.hpp"

namespace fs = std::filesystem;
using namespace chunkbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct GlobalOptions {
  std::string config;
  std::string workdir;
  std::string corpus;
  std::string qa;
  std::optional<std::uint64_t> seed;
  std::string provider;
  std::string endpoint;
  bool force = false;
  bool to_stdout = false;
  std::vector<std::string> formats;
};

pipeline::RunConfig resolve_config(const GlobalOptions& opts) {
  pipeline::RunConfig cfg;
  if (!opts.config.empty()) {
    cfg = pipeline::load_run_config(opts.config);
  }
  if (!opts.workdir.empty()) {
    cfg.workdir = opts.workdir;
  }
  if (!opts.corpus.empty()) {
    cfg.corpus = opts.corpus;
  }
  if (!opts.qa.empty()) {
    cfg.qa = opts.qa;
  }
  if (opts.seed) {
    cfg.seed = *opts.seed;
  }
  if (opts.provider == "remote") {
    cfg.provider.kind = embedding::ProviderKind::Remote;
  } else if (opts.provider == "deterministic") {
    cfg.provider.kind = embedding::ProviderKind::Deterministic;
  }
  if (!opts.endpoint.empty()) {
    cfg.provider.endpoint = opts.endpoint;
  } else if (cfg.provider.endpoint.empty()) {
    if (const char* env = std::getenv("CHUNKBENCH_ENDPOINT"); env != nullptr) {
      cfg.provider.endpoint = env;
    }
  }
  cfg.validate();
  return cfg;
}

std::vector<report::Format> resolve_formats(const GlobalOptions& opts) {
  if (opts.formats.empty()) {
    return {report::Format::Markdown, report::Format::Json, report::Format::Csv};
  }
  std::vector<report::Format> out;
  for (const auto& f : opts.formats) {
    if (auto parsed = report::parse_format(f)) {
      out.push_back(*parsed);
    }
  }
  return out;
}

std::ostream& progress(const GlobalOptions& opts) { return opts.to_stdout ? std::cerr : std::cout; }

int cmd_chunk(const GlobalOptions& opts) {
  const auto cfg = resolve_config(opts);
  if (opts.to_stdout) {
    const auto docs = corpus::load_corpus(cfg.corpus);
    for (auto m : cfg.methods) {
      const auto chunks = pipeline::chunk_corpus(docs, m, cfg);
      std::cout << pipeline::chunks_to_jsonl(chunks);
      progress(opts) << chunkers::method_id(m) << ": " << chunks.size() << " chunks\n";
    }
    return kExitOk;
  }
  pipeline::WorkdirLock lock(cfg.workdir);
  const auto counts = pipeline::run_chunk_stage(cfg, opts.force);
  for (auto m : cfg.methods) {
    progress(opts) << chunkers::method_id(m) << ": " << counts.at(m) << " chunks -> "
                   << pipeline::chunks_path(cfg.workdir, m).string() << "\n";
  }
  return kExitOk;
}

int cmd_embed(const GlobalOptions& opts) {
  const auto cfg = resolve_config(opts);
  pipeline::WorkdirLock lock(cfg.workdir);
  const std::size_t n = pipeline::run_embed_stage(cfg);
  progress(opts) << "embedding cache holds " << n << " vectors -> "
                 << pipeline::embeddings_path(cfg.workdir).string() << "\n";
  return kExitOk;
}

int cmd_index(const GlobalOptions& opts) {
  const auto cfg = resolve_config(opts);
  pipeline::WorkdirLock lock(cfg.workdir);
  pipeline::run_index_stage(cfg, opts.force);
  for (auto m : cfg.methods) {
    progress(opts) << chunkers::method_id(m) << ": index -> " << pipeline::index_path(cfg.workdir, m).string()
                   << "\n";
  }
  return kExitOk;
}

int cmd_evaluate(const GlobalOptions& opts, bool run_all) {
  const auto cfg = resolve_config(opts);
  const auto formats = resolve_formats(opts);
  pipeline::WorkdirLock lock(cfg.workdir);

  bool missing_chunks = false;
  for (auto m : cfg.methods) {
    missing_chunks = missing_chunks || !fs::exists(pipeline::chunks_path(cfg.workdir, m));
  }
  if (run_all && (missing_chunks || opts.force)) {
    pipeline::run_chunk_stage(cfg, true);
  }

  if (!opts.force && !opts.to_stdout) {
    for (auto f : formats) {
      if (fs::exists(pipeline::report_path(cfg.workdir, f))) {
        throw pipeline::OutputExists("report " + pipeline::report_path(cfg.workdir, f).string() +
                                     " already exists (use --force to overwrite)");
      }
    }
  }

  const auto rep = pipeline::run_evaluation(cfg);
  if (opts.to_stdout) {
    for (auto f : formats) {
      std::cout << report::render_report(rep, f);
    }
  } else {
    pipeline::write_report_files(rep, cfg.workdir, formats);
    for (auto f : formats) {
      progress(opts) << "wrote " << pipeline::report_path(cfg.workdir, f).string() << "\n";
    }
  }
  for (const auto& s : rep.summaries) {
    progress(opts) << chunkers::method_label(s.method) << ": " << s.chunk_count << " chunks, avg L2 "
                   << evaluation::format_mean_std(s.metrics[0].across_folds) << "\n";
  }
  return kExitOk;
}

struct CompareOptions {
  std::string report;
  std::string method_a;
  std::string method_b;
  std::string metric = "avg_l2";
  std::string pairing;
};

std::string available_methods(const report::Report& rep) {
  std::string out;
  for (const auto& r : rep.records) {
    if (!out.empty()) {
      out += ", ";
    }
    out += chunkers::method_id(r.method);
  }
  return out;
}

int cmd_compare(const GlobalOptions& opts, const CompareOptions& copts) {
  fs::path path = copts.report;
  if (path.empty()) {
    fs::path workdir = opts.workdir;
    if (workdir.empty() && !opts.config.empty()) {
      workdir = pipeline::load_run_config(opts.config).workdir;
    }
    if (workdir.empty()) {
      throw ConfigError("compare: give --report or --workdir");
    }
    path = pipeline::report_path(workdir, report::Format::Json);
  }
  const auto rep = report::report_from_json(io::read_file(path));

  auto find = [&](const std::string& id) -> const report::MethodRecords& {
    auto m = chunkers::parse_method(id);
    const report::MethodRecords* r = m ? rep.records_for(*m) : nullptr;
    if (r == nullptr) {
      throw ConfigError("compare: method \"" + id + "\" not in report (available: " + available_methods(rep) + ")");
    }
    return *r;
  };
  const auto& a = find(copts.method_a);
  const auto& b = find(copts.method_b);
  auto metric = evaluation::parse_metric(copts.metric);
  if (!metric) {
    throw ConfigError("compare: unknown metric \"" + copts.metric +
                      "\" (available: avg_l2, khmer_coverage, answer_relevance, khmer_iou)");
  }
  auto pairing = rep.run.pairing;
  if (!copts.pairing.empty()) {
    auto p = evaluation::parse_pairing(copts.pairing);
    if (!p) {
      throw ConfigError("compare: unknown pairing \"" + copts.pairing + "\"");
    }
    pairing = *p;
  }
  const auto folds = evaluation::kfold_split(a.records.size(), rep.run.folds, rep.run.seed);
  const auto result = evaluation::compare_methods(a.method, a.records, b.method, b.records, *metric, pairing, folds);
  std::cout << report::render_ttest_table({result});
  return kExitOk;
}

int cmd_report(const GlobalOptions& opts) {
  fs::path workdir = opts.workdir;
  if (workdir.empty() && !opts.config.empty()) {
    workdir = pipeline::load_run_config(opts.config).workdir;
  }
  if (workdir.empty()) {
    throw ConfigError("report: give --workdir or --config");
  }
  const auto rep = report::report_from_json(io::read_file(pipeline::report_path(workdir, report::Format::Json)));
  auto formats = opts.formats.empty() ? std::vector<report::Format>{report::Format::Markdown} : resolve_formats(opts);
  for (auto f : formats) {
    const std::string text = report::render_report(rep, f);
    if (opts.to_stdout) {
      std::cout << text;
      continue;
    }
    const auto path = pipeline::report_path(workdir, f);
    if (f != report::Format::Json) {
      if (fs::exists(path) && !opts.force) {
        throw pipeline::OutputExists("report " + path.string() + " already exists (use --force to overwrite)");
      }
      io::write_file_atomic(path, text);
      progress(opts) << "wrote " << path.string() << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chunking strategy evaluation for Khmer retrieval"};
  app.require_subcommand(1);
  GlobalOptions opts;
  app.add_option("--config", opts.config, "Run configuration (JSON)");
  app.add_option("--workdir", opts.workdir, "Directory for stage artifacts");
  app.add_option("--corpus", opts.corpus, "Corpus JSONL (overrides config)");
  app.add_option("--qa", opts.qa, "QA JSONL (overrides config)");
  app.add_option("--seed", opts.seed, "Fold shuffle seed");
  app.add_option("--provider", opts.provider, "Embedding provider")->check(CLI::IsMember({"deterministic", "remote"}));
  app.add_option("--endpoint", opts.endpoint, "Embedding service URL (falls back to $CHUNKBENCH_ENDPOINT)");
  app.add_flag("--force", opts.force, "Overwrite existing outputs");
  app.add_flag("--stdout", opts.to_stdout, "Write machine-readable output to stdout instead of files");
  app.add_option("--format", opts.formats, "Report format(s)")->check(CLI::IsMember({"md", "json", "csv"}));

  auto* chunk = app.add_subcommand("chunk", "Chunk the corpus with every selected method");
  app.add_subcommand("embed", "Embed chunks, questions and answers into the workdir cache");
  auto* index = app.add_subcommand("index", "Build one flat index per method");
  auto* evaluate = app.add_subcommand("evaluate", "Score every method and write report files");
  bool run_all = false;
  evaluate->add_flag("--all", run_all, "Run the chunk stage first when chunk files are missing");
  auto* compare = app.add_subcommand("compare", "Paired t-test between two methods from report.json");
  CompareOptions copts;
  compare->add_option("--report", copts.report, "report.json (default: <workdir>/report.json)");
  compare->add_option("--a", copts.method_a, "First method")->required();
  compare->add_option("--b", copts.method_b, "Second method")->required();
  compare->add_option("--metric", copts.metric, "avg_l2, khmer_coverage, answer_relevance or khmer_iou");
  compare->add_option("--pairing", copts.pairing, "per_question or per_fold (default: as in the report)");
  auto* rep = app.add_subcommand("report", "Re-render report files from report.json");
  static_cast<void>(chunk);
  static_cast<void>(index);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "chunk") {
      return cmd_chunk(opts);
    }
    if (name == "embed") {
      return cmd_embed(opts);
    }
    if (name == "index") {
      return cmd_index(opts);
    }
    if (name == "evaluate") {
      return cmd_evaluate(opts, run_all);
    }
    if (name == "compare") {
      return cmd_compare(opts, copts);
    }
    if (rep->parsed()) {
      return cmd_report(opts);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
