#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "chunkbench/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kSource = CHUNKBENCH_SOURCE_DIR;
const fs::path kMiniConfig = kSource / "data" / "mini" / "config.json";

struct RunResult {
  int code = -1;
  std::string out;
};

// with_stderr folds stderr into out, for checking error messages.
RunResult run(const std::string& args, bool with_stderr = false) {
  const std::string cmd = std::string(CHUNKBENCH_CLI) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    return r;
  }
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
    r.out.append(buf, n);
  }
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("chunkbench_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string mini(const fs::path& workdir) {
  return "--config " + kMiniConfig.string() + " --workdir " + workdir.string();
}

}  // namespace

TEST(Cli, ChunkWritesFourFilesAndRefusesRerun) {
  const auto dir = fresh_dir("chunk");
  const auto r = run(mini(dir) + " chunk");
  EXPECT_EQ(r.code, 0);
  for (const char* id : {"llm", "khmer_aware", "recursive", "sentence"}) {
    EXPECT_TRUE(fs::exists(dir / "chunks" / (std::string(id) + ".jsonl"))) << id;
    EXPECT_NE(r.out.find(std::string(id) + ": "), std::string::npos) << r.out;
  }
  EXPECT_EQ(run(mini(dir) + " chunk").code, 1);
  EXPECT_EQ(run(mini(dir) + " --force chunk").code, 0);
}

TEST(Cli, UnknownMethodInConfig) {
  const auto dir = fresh_dir("badmethod");
  std::ofstream(dir / "cfg.json") << R"({"corpus":")" << (kSource / "data/mini/corpus.jsonl").string()
                                  << R"(","methods":["recursive","semantic"]})";
  const auto r = run("--config " + (dir / "cfg.json").string() + " chunk", true);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("semantic"), std::string::npos) << r.out;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("--format xlsx evaluate").code, 1);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, EvaluateAllWritesEveryReport) {
  const auto dir = fresh_dir("evaluate");
  EXPECT_EQ(run(mini(dir) + " evaluate --all").code, 0);
  for (const char* f : {"report.md", "report.json", "report.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(run(mini(dir) + " evaluate").code, 1);
  EXPECT_EQ(run(mini(dir) + " --force evaluate").code, 0);
}

TEST(Cli, FormatJsonOnly) {
  const auto dir = fresh_dir("jsononly");
  EXPECT_EQ(run(mini(dir) + " --format json evaluate --all").code, 0);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_FALSE(fs::exists(dir / "report.md"));
  EXPECT_FALSE(fs::exists(dir / "report.csv"));
}

TEST(Cli, StdoutCarriesReportInsteadOfFiles) {
  const auto dir = fresh_dir("stdout");
  ASSERT_EQ(run(mini(dir) + " chunk").code, 0);
  const auto r = run(mini(dir) + " --stdout --format csv evaluate");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("method,chunks,", 0), 0u) << r.out;
  EXPECT_FALSE(fs::exists(dir / "report.csv"));
}

TEST(Cli, RemoteProviderDownLeavesNoReports) {
  const auto dir = fresh_dir("remote");
  ASSERT_EQ(run(mini(dir) + " chunk").code, 0);
  const auto r = run(mini(dir) + " --provider remote --endpoint http://127.0.0.1:9 evaluate");
  EXPECT_EQ(r.code, 2);
  for (const auto& e : fs::directory_iterator(dir)) {
    EXPECT_NE(e.path().filename().string().rfind("report.", 0), 0u) << e.path();
  }
}

TEST(Cli, EndpointFromEnvironment) {
  const auto dir = fresh_dir("envendpoint");
  ASSERT_EQ(run(mini(dir) + " chunk").code, 0);
  const auto r = run("--provider remote " + mini(dir) + " evaluate");
  EXPECT_EQ(r.code, 1);
  setenv("CHUNKBENCH_ENDPOINT", "http://127.0.0.1:9", 1);
  const auto with_env = run("--provider remote " + mini(dir) + " evaluate");
  unsetenv("CHUNKBENCH_ENDPOINT");
  EXPECT_EQ(with_env.code, 2);
}

TEST(Cli, LockedWorkdir) {
  const auto dir = fresh_dir("locked");
  std::ofstream(dir / ".chunkbench.lock") << "12345\n";
  EXPECT_EQ(run(mini(dir) + " chunk").code, 2);
}

TEST(Cli, StagesRunSeparately) {
  const auto dir = fresh_dir("stages");
  EXPECT_EQ(run(mini(dir) + " chunk").code, 0);
  EXPECT_EQ(run(mini(dir) + " embed").code, 0);
  EXPECT_EQ(run(mini(dir) + " index").code, 0);
  EXPECT_TRUE(fs::exists(dir / "index" / "recursive.cbvx"));
  EXPECT_TRUE(fs::exists(dir / "embeddings.jsonl"));
  EXPECT_EQ(run(mini(dir) + " evaluate").code, 0);
  fs::remove(dir / "report.md");
  EXPECT_EQ(run("--workdir " + dir.string() + " --format md report").code, 0);
  EXPECT_TRUE(fs::exists(dir / "report.md"));
}

TEST(Cli, CompareSelfAndMissing) {
  const auto report = kSource / "tests" / "golden" / "report.json";
  const auto self = run("compare --report " + report.string() + " --a recursive --b recursive --metric avg_l2");
  EXPECT_EQ(self.code, 0);
  EXPECT_NE(self.out.find("| 0.0000 | 5 | 1.0000 |"), std::string::npos) << self.out;

  const auto missing = run("compare --report " + report.string() + " --a recursive --b nonesuch", true);
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.out.find("llm, khmer_aware, recursive, sentence"), std::string::npos) << missing.out;

  EXPECT_EQ(run("compare --report " + report.string() + " --a recursive --b llm --metric bleu").code, 1);
}

TEST(Cli, CompareRecursiveSentenceSnapshot) {
  const auto report = kSource / "tests" / "golden" / "report.json";
  const auto r = run("compare --report " + report.string() + " --a recursive --b sentence --metric avg_l2");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, chunkbench::io::read_file(kSource / "tests" / "golden" / "compare_recursive_sentence.md"));
}
