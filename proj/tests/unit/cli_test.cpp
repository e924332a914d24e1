#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "avexpr/cli.hpp"

using namespace avexpr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "avexpr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  const auto b = io::read_file(p);
  return {b.begin(), b.end()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("avexpr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string p(const std::string& rel) const { return (dir_ / rel).string(); }

  void synth(const std::string& sub, int videos = 6, int frames = 240) {
    const auto r = run_cli({"synth", "--out-dir", p(sub), "--seed", "3", "--videos", std::to_string(videos), "--frames",
                            std::to_string(frames), "--visual-dim", "8", "--audio-dim", "6"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  fs::path dir_;
};

RasterImage gradient(int w, int h) {
  RasterImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(x * 20);
      img.at(x, y, 1) = static_cast<std::uint8_t>(y * 20);
      img.at(x, y, 2) = 128;
    }
  }
  return img;
}

}  // namespace

TEST(Cli, HelpListsSubcommandsAndExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* s : {"align", "train", "predict", "smooth", "eval", "sweep", "augment", "crop", "folds"}) {
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
  }
  const auto t = run_cli({"train", "--help"});
  EXPECT_EQ(t.code, 0);
  for (const char* f : {"--head", "--k", "--epochs", "--lr", "--seed", "--cv"}) EXPECT_NE(t.out.find(f), std::string::npos) << f;
}

TEST(Cli, UsageErrorsExitTwo) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"frobnicate"}, {"eval", "--bogus"}, {"train", "--out-dir", "x"}, {"train", "--manifest", "m", "--out-dir", "o", "--head", "rnn"}}) {
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(r.err.rfind("error: usage:", 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  }
}

TEST_F(CliTest, DataErrorExitsOneWithSingleLine) {
  const auto r = run_cli({"folds", "--manifest", p("missing.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: io:", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  io::write_file(p("junk.lgt1"), io::Bytes{'L', 'G', 'T', '1', 1, 2});
  const auto bad = run_cli({"eval", "--pred", p("junk.lgt1"), "--truth", p("junk.lgt1")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.err.rfind("error: corruption:", 0), 0u) << bad.err;
}

TEST_F(CliTest, EvalOfIdenticalInputsIsPerfect) {
  Matrix x(4, 8);
  x.setZero();
  for (int t = 0; t < 4; ++t) x(t, t) = 1.0;
  write_logits(x, p("a.lgt1"));
  const auto r = run_cli({"eval", "--pred", p("a.lgt1"), "--truth", p("a.lgt1"), "--out", p("r.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(p("r.json")));
  EXPECT_EQ(j["macro_f1_present_classes"].get<double>(), 1.0);
  EXPECT_EQ(j["macro_f1"].get<double>(), 0.5);
}

TEST_F(CliTest, SmoothWindowOneIsBitIdentical) {
  Rng rng(1);
  Matrix x(50, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  write_logits(x, p("in.lgt1"));
  for (const char* s : {"mean", "median", "gaussian", "vote"}) {
    const auto r = run_cli({"smooth", "--in", p("in.lgt1"), "--out", p("out.lgt1"), "--window", "1", "--strategy", s});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(io::read_file(p("in.lgt1")), io::read_file(p("out.lgt1"))) << s;
  }
  const auto even = run_cli({"smooth", "--in", p("in.lgt1"), "--out", p("out.lgt1"), "--window", "4"});
  EXPECT_EQ(even.code, 1);
  EXPECT_EQ(even.err.rfind("error: validation:", 0), 0u) << even.err;
}

TEST_F(CliTest, AlignIsIdempotentAndJobsInvariant) {
  synth("data");
  ASSERT_EQ(run_cli({"align", "--manifest", p("data/manifest.jsonl"), "--out-dir", p("a1"), "--mode", "window"}).code, 0);
  ASSERT_EQ(run_cli({"align", "--manifest", p("data/manifest.jsonl"), "--out-dir", p("a1"), "--mode", "window"}).code, 0);
  ASSERT_EQ(run_cli({"align", "--manifest", p("data/manifest.jsonl"), "--out-dir", p("a4"), "--mode", "window", "--jobs", "4"}).code, 0);
  for (const auto& e : read_manifest(p("a1/manifest.jsonl"))) {
    EXPECT_EQ(io::read_file(e.path), io::read_file(p("a4/" + e.id + ".aff1"))) << e.id;
    const auto seq = read_feature_file(e.path);
    EXPECT_EQ(seq.audio_dim, 6u);
  }
}

TEST_F(CliTest, FoldsPartitionManifestIds) {
  synth("data", 7, 30);
  const auto r = run_cli({"folds", "--manifest", p("data/manifest.jsonl"), "--k", "3", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  std::set<std::string> seen;
  for (const auto& f : j["folds"]) {
    for (const auto& id : f) EXPECT_TRUE(seen.insert(id.get<std::string>()).second);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(run_cli({"folds", "--manifest", p("data/manifest.jsonl"), "--k", "3", "--seed", "4"}).out, r.out);
}

TEST_F(CliTest, CropWritesOneImagePerScale) {
  write_ppm(gradient(12, 12), p("f.ppm"));
  {
    std::ofstream m(p("frames.jsonl"));
    m << R"({"id": "f", "path": "f.ppm", "box": [6, 6, 6]})" << "\n";
  }
  const auto r = run_cli({"crop", "--manifest", p("frames.jsonl"), "--out-dir", p("crops"), "--out-side", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto entries = read_manifest(p("crops/manifest.jsonl"));
  ASSERT_EQ(entries.size(), 3u);
  for (const auto& e : entries) {
    const auto img = read_ppm(e.path);
    EXPECT_EQ(img.width, 10);
    EXPECT_EQ(e.fields["source_id"], "f");
  }
  EXPECT_EQ(entries[0].fields["scale"].get<double>(), 0.9);
}

TEST_F(CliTest, AugmentIsDeterministicAcrossJobs) {
  {
    std::ofstream m(p("imgs.jsonl"));
    for (int i = 0; i < 6; ++i) {
      write_ppm(gradient(10, 10), p("i" + std::to_string(i) + ".ppm"));
      m << R"({"id": "i)" << i << R"(", "path": "i)" << i << R"(.ppm"})" << "\n";
    }
  }
  ASSERT_EQ(run_cli({"augment", "--manifest", p("imgs.jsonl"), "--out-dir", p("o1"), "--probability", "1", "--seed", "9"}).code, 0);
  ASSERT_EQ(run_cli({"augment", "--manifest", p("imgs.jsonl"), "--out-dir", p("o3"), "--probability", "1", "--seed", "9",
                     "--jobs", "3"}).code, 0);
  for (int i = 0; i < 6; ++i) {
    const auto a = read_ppm(p("o1/i" + std::to_string(i) + ".ppm"));
    EXPECT_EQ(a, read_ppm(p("o3/i" + std::to_string(i) + ".ppm")));
    EXPECT_NE(a, gradient(10, 10));
  }
}

TEST_F(CliTest, PipelineMatchesGolden) {
  synth("data");
  ASSERT_EQ(run_cli({"align", "--manifest", p("data/manifest.jsonl"), "--out-dir", p("aligned")}).code, 0);
  const auto tr = run_cli({"train", "--manifest", p("aligned/manifest.jsonl"), "--out-dir", p("run"), "--head", "gated",
                           "--k", "3", "--fold", "0", "--epochs", "3", "--fusion-hidden", "16", "--lr", "3e-3", "--seed", "1"});
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_TRUE(fs::exists(p("run/checkpoint.ntc1")));
  const auto hist = nlohmann::json::parse(slurp(p("run/history.json")));
  EXPECT_EQ(hist["epochs"].size(), 3u);
  const auto pr = run_cli({"predict", "--checkpoint", p("run/checkpoint.ntc1"), "--manifest", p("aligned/manifest.jsonl"),
                           "--out-dir", p("logits")});
  ASSERT_EQ(pr.code, 0) << pr.err;
  const auto sw = run_cli({"sweep", "--logits-manifest", p("logits/manifest.jsonl"), "--manifest", p("aligned/manifest.jsonl"),
                           "--windows", "1:61:10"});
  ASSERT_EQ(sw.code, 0) << sw.err;
  EXPECT_EQ(sw.out.rfind("window,macro_f1\n1,", 0), 0u);

  const auto golden = fs::path(AVEXPR_GOLDEN_DIR) / "pipeline_sweep.csv";
  if (std::getenv("AVEXPR_REGEN_GOLDEN") != nullptr) cli::detail::write_text(golden, sw.out);
  ASSERT_TRUE(fs::exists(golden)) << "missing golden " << golden;
  EXPECT_EQ(sw.out, slurp(golden));
}
