#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "rapt/fileio.hpp"
#include "test_util.hpp"

namespace {

const std::string kCli = RAPT_CLI_PATH;
const std::string kData = RAPT_TEST_DATA;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  Run r;
  const std::string cmd = "'" + kCli + "' " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) r.out += buf.data();
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string toy(const testutil::TempDir& out) {
  return "--out " + out.path().string() + " --train " + kData + "/toy_train.jsonl --test " + kData +
         "/toy_test.jsonl";
}

}  // namespace

TEST(Cli, ParamsTable) {
  const auto r = run("params");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("354,823,168"), std::string::npos);
  EXPECT_NE(r.out.find("1,853,440"), std::string::npos);
  const auto csv = run("params --csv --model gpt2-medium");
  EXPECT_NE(csv.out.find("NC-RAPT,1089536"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("generate --mode sideways").code, 1);
  EXPECT_EQ(run("generate --set nonsense").code, 1);
  EXPECT_EQ(run("params --model gpt3").code, 1);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run("--help").code, 0); }

TEST(Cli, DataErrorsExitTwo) {
  testutil::TempDir dir("cli");
  const auto r = run("label --out " + dir.path().string() + " --train /nonexistent.jsonl");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("nonexistent"), std::string::npos);
}

TEST(Cli, BackendErrorsExitThree) {
  testutil::TempDir dir("cli");
  const auto r = run("generate " + toy(dir) +
                     " --generation-url http://127.0.0.1:1/generate --embedding-url mock:embed"
                     " --set backend.retry_limit=0 --set backend.timeout_ms=500");
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, MockPipelineEndToEnd) {
  testutil::TempDir dir("cli");
  const auto r = run("pipeline " + toy(dir) + " --mode ncrapt --query-class low"
                     " --generation-url mock:echo --embedding-url mock:embed");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("NC-RAPT (low)"), std::string::npos);
  for (const char* name : {"labeled.train.jsonl", "train.emb", "generations.jsonl", "requests.jsonl", "report.csv",
                           "pipeline.config"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  const auto snapshot = rapt::read_file(dir / "pipeline.config");
  EXPECT_NE(snapshot.find("ncrapt.query_class = low"), std::string::npos);
}

TEST(Cli, ConfigFileAndOverridePrecedence) {
  testutil::TempDir dir("cli");
  std::ofstream(dir / "run.conf") << "[generate]\nmode = manual\n[retrieval]\nk = 5\n";
  const auto r = run("--config " + (dir / "run.conf").string() + " generate " + toy(dir) +
                     " --mode copy -k 1 --set retrieval.k=4");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto snapshot = rapt::read_file(dir / "generate.config");
  EXPECT_NE(snapshot.find("generate.mode = copy"), std::string::npos);
  EXPECT_NE(snapshot.find("retrieval.k = 4"), std::string::npos);
}
