#include <symwalk/io.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string err;
};

// Runs the binary with stderr captured to a file.
Result run(const fs::path& dir, const std::string& args) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(SYMWALK_EXE) + " " + args + " 2> " + err.string() + " > " +
                          (dir / "stdout.txt").string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = symwalk::read_file(err.string());
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("symwalk_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(Cli, NoisySquareEndToEnd) {
  ASSERT_EQ(run(dir_, "gen --kind square --noise 0.03 --seed 7 --points 400 -o " + p("sq.json")).code, 0);
  const Result d = run(dir_, "detect -i " + p("sq.json") + " --steps 5000 --pairs 2000 -o " + p("det.json") +
                              " --space-out " + p("space.json"));
  ASSERT_EQ(d.code, 0) << d.err;
  ASSERT_EQ(run(dir_, "eval -p " + p("det.json") + " -g " + p("sq.json") + " -o " + p("eval.json")).code, 0);
  const auto report = symwalk::load_json(p("eval.json"));
  EXPECT_GE(report.at("recall").get<double>(), 0.75);

  const auto manifest = symwalk::load_json(p("run.json"));
  for (const char* out : {"sq.json", "det.json", "eval.json"}) ASSERT_TRUE(manifest.at("runs").contains(out));
  const auto& det = manifest["runs"]["det.json"];
  EXPECT_EQ(det.at("config").at("steps").get<int>(), 5000);
  EXPECT_EQ(det.at("inputs")[0].at("fnv1a").get<std::string>().size(), 16u);
  EXPECT_TRUE(det.at("seconds").contains("langevin"));

  // the applications run on the detection
  ASSERT_EQ(run(dir_, "compress -i " + p("sq.json") + " -r " + p("det.json") + " -o " + p("c.json") +
                          " --restored " + p("back.xyz")).code, 0);
  EXPECT_TRUE(fs::exists(p("back.xyz")));
  ASSERT_EQ(run(dir_, "symmetrize -i " + p("sq.json") + " -r " + p("det.json") + " -o " + p("sym.xyz")).code, 0);
  ASSERT_EQ(run(dir_, "render -i " + p("sq.json") + " -r " + p("det.json") + " --space " + p("space.json") +
                          " -o " + p("out.svg")).code, 0);
  EXPECT_NE(symwalk::read_file(p("out.svg")).find("<svg"), std::string::npos);
}

TEST_F(Cli, ZeroStepsIsAUsageError) {
  ASSERT_EQ(run(dir_, "gen --kind square -o " + p("sq.json")).code, 0);
  const Result r = run(dir_, "detect -i " + p("sq.json") + " --steps 0");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("steps must be >= 1"), std::string::npos) << r.err;
}

TEST_F(Cli, RenderWithNothingDetected) {
  ASSERT_EQ(run(dir_, "gen --kind square -o " + p("sq.xyz")).code, 0);
  EXPECT_TRUE(fs::exists(p("sq.gt.json")));
  symwalk::write_file(p("empty.json"), R"({"method":"langevin","kind":"reflective","dim":2,"symmetries":[]})");
  ASSERT_EQ(run(dir_, "render -i " + p("sq.xyz") + " -r " + p("empty.json") + " -o " + p("e.svg")).code, 0);
  EXPECT_NE(symwalk::read_file(p("e.svg")).find("</svg>"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(dir_, "--help").code, 0);
  EXPECT_EQ(run(dir_, "detect -i " + p("missing.xyz") + " --dim 2").code, 2);
  EXPECT_EQ(run(dir_, "detect --no-such-flag").code, 1);
  EXPECT_EQ(run(dir_, "").code, 1);
  symwalk::write_file(p("bad.xyz"), "0 0\n1 oops\n");
  const Result r = run(dir_, "detect -i " + p("bad.xyz") + " --dim 2");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":2"), std::string::npos) << r.err;
  symwalk::write_file(p("bad.json"), "{not json");
  EXPECT_EQ(run(dir_, "detect -i " + p("bad.json")).code, 2);
}

}  // namespace
