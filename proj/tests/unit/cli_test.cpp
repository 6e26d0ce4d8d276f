#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int status = -1;
  std::string output; // stdout and stderr
};

Outcome run(const std::string &args) {
  const std::string cmd = std::string(MANTIS_BIN) + " " + args + " 2>&1";
  Outcome o;
  FILE *pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) o.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mantis_cli_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string &rel) const { return (dir_ / rel).string(); }

  fs::path dir_;
};

TEST_F(Cli, MissingCsvExitsOneAndNamesPath) {
  const Outcome o = run("train " + path("missing.csv"));
  EXPECT_EQ(o.status, 1);
  EXPECT_NE(o.output.find("missing.csv"), std::string::npos) << o.output;
}

TEST_F(Cli, ParseErrorExitsOne) {
  std::ofstream(path("bad.mimp")) << "fn main() { int x = ; }\n";
  const Outcome o = run("instrument " + path("bad.mimp") + " -o " + path("out"));
  EXPECT_EQ(o.status, 1);
}

TEST_F(Cli, UnknownBenchmarkExitsOne) { EXPECT_EQ(run("gen-inputs nope -o " + path("in")).status, 1); }

TEST_F(Cli, ListNamesBenchmarks) {
  const Outcome o = run("list");
  EXPECT_EQ(o.status, 0);
  EXPECT_NE(o.output.find("gridwork"), std::string::npos);
  EXPECT_NE(o.output.find("feedback"), std::string::npos);
}

TEST_F(Cli, StageByStage) {
  ASSERT_EQ(run("gen-inputs readloop -n 40 --seed 3 --source " + path("readloop.mimp") + " -o " + path("in")).status,
            0);
  ASSERT_EQ(run("instrument " + path("readloop.mimp") + " -o " + path("inst")).status, 0);
  ASSERT_TRUE(fs::exists(path("inst/readloop.instr.mimp")));
  ASSERT_TRUE(fs::exists(path("inst/schema.json")));

  ASSERT_EQ(run("profile " + path("inst/readloop.instr.mimp") + " --inputs " + path("in") + " -o " +
                path("profile.csv"))
                .status,
            0);
  std::istringstream csv(slurp(path("profile.csv")));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 41u);

  const Outcome t = run("train " + path("profile.csv") + " --sweep -o " + path("model.json"));
  ASSERT_EQ(t.status, 0) << t.output;
  const auto model = nlohmann::json::parse(slurp(path("model.json")));
  EXPECT_TRUE(model.contains("selectedFeatures"));
  EXPECT_TRUE(fs::exists(path("lambda_sweep.csv")));
  EXPECT_TRUE(fs::exists(path("train_size_sweep.csv")));

  const auto schema = nlohmann::json::parse(slurp(path("inst/schema.json")));
  std::string loop_id;
  for (const auto &f : schema.at("features"))
    if (f.at("kind") == "loop") loop_id = f.at("id").get<std::string>();
  ASSERT_FALSE(loop_id.empty());
  const Outcome s = run("slice " + path("inst/readloop.instr.mimp") + " --feature " + loop_id + " --inputs " +
                        path("in") + " -o " + path("slices"));
  ASSERT_EQ(s.status, 0) << s.output;
  const auto manifest = nlohmann::json::parse(slurp(path("slices/" + loop_id + ".manifest.json")));
  EXPECT_LE(manifest.at("cost").at("meanRatio").get<double>(), 0.10);
}

TEST_F(Cli, PipelineThenPredict) {
  ASSERT_EQ(run("gen-inputs feedback -n 300 --seed 42 --source " + path("fb.mimp") + " -o " + path("in")).status, 0);
  const Outcome p = run("pipeline " + path("fb.mimp") + " --inputs " + path("in") + " --noise 0.02 -o " +
                        path("bundle"));
  ASSERT_EQ(p.status, 0) << p.output;
  const auto log = nlohmann::json::parse(slurp(path("bundle/rejection_log.json")));
  EXPECT_EQ(log.at("iterations").size(), 2u);
  const Outcome q = run("predict " + path("bundle") + " " + path("in/input-0000.txt"));
  EXPECT_EQ(q.status, 0) << q.output;
  EXPECT_FALSE(q.output.empty());
}

TEST_F(Cli, IterationLimitExitsNonzeroWithPartialLog) {
  ASSERT_EQ(run("gen-inputs feedback -n 300 --seed 42 --source " + path("fb.mimp") + " -o " + path("in")).status, 0);
  const Outcome p = run("pipeline " + path("fb.mimp") + " --inputs " + path("in") +
                        " --noise 0.02 --max-iterations 0 -o " + path("bundle"));
  EXPECT_EQ(p.status, 1) << p.output;
  EXPECT_TRUE(fs::exists(path("bundle/rejection_log.json")));
}

} // namespace
