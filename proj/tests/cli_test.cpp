#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hv3d/commands.hpp"
#include "test_support.hpp"

namespace hv3d {
namespace {

namespace fs = std::filesystem;

// Two references with different depth structure, written to `dir`.
fs::path make_corpus(const fs::path& dir, int frames = 2) {
  Manifest m;
  auto a = testing::make_stereo_sequence(64, 64, frames, 1, testing::DepthKind::ramp);
  auto b = testing::make_stereo_sequence(64, 64, frames, 2, testing::DepthKind::layered);
  m.entries.push_back(testing::write_sequence_files(a, dir, "alpha"));
  m.entries.push_back(testing::write_sequence_files(b, dir, "beta"));
  auto path = dir / "manifest.txt";
  write_manifest(path, m);
  return path;
}

std::vector<DistortionSpec> specs(std::initializer_list<const char*> texts) {
  std::vector<DistortionSpec> out;
  for (const char* t : texts) out.push_back(parse_distortion_spec(t, 17));
  return out;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

int run_cli(const std::string& args) {
  const char* exe = std::getenv("HV3D_CLI");
  if (!exe) return -1;
  std::string cmd = std::string("\"") + exe + "\" " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

TEST(CmdScore, SelfScoreIsWeightSum) {
  auto dir = testing::scratch_dir("cli_self");
  auto man = make_corpus(dir);
  std::ostringstream log;
  RunConfig cfg;
  auto s = cmd_score(man, "alpha", "alpha", cfg, dir / "report.csv", log);
  EXPECT_NEAR(s.pooled, 0.9920, 1e-9);
  EXPECT_NE(log.str().find("pooled_hv3d="), std::string::npos);
  auto table = read_csv(dir / "report.csv", report_columns());
  EXPECT_EQ(table.rows.size(), 2u);

  cfg.weights = Weights::zero();
  EXPECT_EQ(cmd_score(man, "alpha", "alpha", cfg, {}, log).pooled, 0.0);
}

TEST(CmdScore, MismatchedFrameCountsFail) {
  auto dir = testing::scratch_dir("cli_mismatch");
  Manifest m;
  m.entries.push_back(testing::write_sequence_files(
      testing::make_stereo_sequence(64, 64, 2, 1), dir, "two"));
  m.entries.push_back(testing::write_sequence_files(
      testing::make_stereo_sequence(64, 64, 3, 1), dir, "three"));
  write_manifest(dir / "manifest.txt", m);
  std::ostringstream log;
  EXPECT_THROW(cmd_score(dir / "manifest.txt", "two", "three", {}, {}, log), ContractError);
  EXPECT_THROW(cmd_score(dir / "manifest.txt", "two", "nope", {}, {}, log), ConfigError);
}

TEST(CmdDistort, EmitsOneSequencePerReferenceAndSpec) {
  auto dir = testing::scratch_dir("cli_distort");
  auto man = make_corpus(dir);
  std::ostringstream log;
  auto out = cmd_distort(man, specs({"noise:0.01", "blur:4:4", "shift:20"}), dir / "out", 2, log);
  int distorted = 0;
  for (const auto& e : out.entries) {
    if (!e.is_distorted()) continue;
    ++distorted;
    EXPECT_TRUE(fs::exists(e.left_path));
    EXPECT_TRUE(fs::exists(e.right_path));
  }
  EXPECT_EQ(distorted, 6);
  auto reloaded = load_manifest(dir / "out" / "manifest.txt");
  EXPECT_EQ(reloaded.entries.size(), 8u);
  EXPECT_EQ(reloaded.find("beta__blur_4_4").reference, "beta");
}

TEST(CmdDistort, RerunIsBitIdentical) {
  auto dir = testing::scratch_dir("cli_rerun");
  auto man = make_corpus(dir);
  std::ostringstream log;
  auto s = specs({"noise:0.01", "blur:4:4"});
  cmd_distort(man, s, dir / "a", 1, log);
  cmd_distort(man, s, dir / "b", 3, log);
  for (const char* f : {"alpha__noise_0.01_left.yuv", "beta__noise_0.01_right.yuv",
                        "alpha__blur_4_4_right.yuv"})
    EXPECT_EQ(testing::read_file(dir / "a" / f), testing::read_file(dir / "b" / f)) << f;
}

TEST(CmdDistort, RejectsBadSpecsAndMissingExternalFiles) {
  auto dir = testing::scratch_dir("cli_badspec");
  auto man = make_corpus(dir);
  std::ostringstream log;
  EXPECT_THROW(cmd_distort(man, specs({"noise:0.01", "noise:0.01"}), dir / "o", 1, log),
               ConfigError);
  EXPECT_THROW(cmd_distort(man, {}, dir / "o", 1, log), ConfigError);
  EXPECT_THROW(cmd_distort(man, specs({"external:codec:gone/{label}_{view}.yuv"}), dir / "o", 1,
                           log),
               IngestError);
}

TEST(CmdDistort, ExternalFilesAreReferenced) {
  auto dir = testing::scratch_dir("cli_external");
  auto man = make_corpus(dir);
  fs::create_directories(dir / "ext");
  for (const char* label : {"alpha", "beta"})
    for (const char* view : {"left", "right"})
      fs::copy_file(dir / (std::string(label) + "_" + view + ".yuv"),
                    dir / "ext" / (std::string(label) + "_" + view + ".yuv"));
  std::ostringstream log;
  auto out = cmd_distort(man, specs({"external:copy:ext/{label}_{view}.yuv"}), dir / "o", 1, log);
  const auto& e = out.find("alpha__copy");
  EXPECT_EQ(e.distortion, "copy");
  EXPECT_EQ(e.depth_path, out.find("alpha").depth_path);
  auto s = cmd_score(dir / "o" / "manifest.txt", "alpha", "alpha__copy", {}, {}, log);
  EXPECT_NEAR(s.pooled, 0.9920, 1e-9);
}

TEST(CmdCalibrate, ClosedLoopRecoversWeights) {
  auto dir = testing::scratch_dir("cli_calibrate");
  auto man = make_corpus(dir);
  std::ostringstream log;
  cmd_distort(man, specs({"noise:0.01", "blur:4:4", "shift:20", "noise:0.002:5"}), dir / "d", 1,
              log);
  auto dman = dir / "d" / "manifest.txt";
  RunConfig cfg;
  auto scored = cmd_score_all(dman, cfg, dir / "scores.csv", log);
  ASSERT_EQ(scored.size(), 8u);

  std::ostringstream mos;
  mos << "label,distortion,mos\n";
  for (const auto& s : scored)
    mos << s.reference << ',' << s.distortion << ',' << format_real(10 * s.pooled.hv3d) << '\n';
  write_text(dir / "mos.csv", mos.str());

  auto run = cmd_calibrate(dman, dir / "mos.csv", cfg, dir / "w.csv", dir / "r.csv", log);
  const Weights& w = run.result.weights;
  EXPECT_NEAR(w.w1, 0.14, 1e-6);
  EXPECT_NEAR(w.w2, 0.1208, 1e-6);
  EXPECT_NEAR(w.w3, 0.05, 1e-6);
  EXPECT_NEAR(w.w4, 0.1353, 1e-6);
  auto back = parse_weights((dir / "w.csv").string());
  EXPECT_EQ(back, w);
  EXPECT_EQ(read_csv(dir / "r.csv", {"residual"}).rows.size(), 8u);

  auto eval = cmd_evaluate(dir / "scores.csv", dir / "mos.csv", dir / "plot.csv", log);
  EXPECT_DOUBLE_EQ(eval.spearman, 1.0);
  EXPECT_EQ(eval.pairs, 8u);
  EXPECT_TRUE(eval.has_logistic);
}

TEST(CmdCalibrate, MissingOrEmptyMosIsIngestError) {
  auto dir = testing::scratch_dir("cli_mos");
  auto man = make_corpus(dir, 1);
  std::ostringstream log;
  cmd_distort(man, specs({"shift:20"}), dir / "d", 1, log);
  write_text(dir / "empty.csv", "label,distortion,mos\n");
  EXPECT_THROW(cmd_calibrate(dir / "d" / "manifest.txt", dir / "empty.csv", {}, {}, {}, log),
               IngestError);
  write_text(dir / "partial.csv", "label,distortion,mos\nalpha,shift_20,7\n");
  try {
    cmd_calibrate(dir / "d" / "manifest.txt", dir / "partial.csv", {}, {}, {}, log);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("(beta, shift_20)"), std::string::npos) << e.what();
  }
  write_text(dir / "range.csv", "label,distortion,mos\nalpha,shift_20,11\n");
  EXPECT_THROW(cmd_calibrate(dir / "d" / "manifest.txt", dir / "range.csv", {}, {}, {}, log),
               IngestError);
}

TEST(CmdEvaluate, ReversedRankingAndEmptyJoin) {
  auto dir = testing::scratch_dir("cli_eval");
  std::ostringstream sc, mo;
  sc << "label,distortion,score\n";
  mo << "label,distortion,mos\n";
  for (int i = 0; i < 6; ++i) {
    sc << "s,d" << i << ',' << 0.1 * i << '\n';
    mo << "s,d" << i << ',' << 9 - i << '\n';
  }
  write_text(dir / "scores.csv", sc.str());
  write_text(dir / "mos.csv", mo.str());
  std::ostringstream log;
  EXPECT_DOUBLE_EQ(cmd_evaluate(dir / "scores.csv", dir / "mos.csv", {}, log).spearman, -1.0);
  write_text(dir / "other.csv", "label,distortion,mos\nx,y,5\n");
  EXPECT_THROW(cmd_evaluate(dir / "scores.csv", dir / "other.csv", {}, log), EvaluationError);
}

TEST(CmdDumpMask, WritesAllWeights) {
  auto dir = testing::scratch_dir("cli_mask");
  std::ostringstream log;
  for (int n : {8, 16}) {
    auto out = dir / ("mask" + std::to_string(n) + ".csv");
    cmd_dump_mask(n, out, log);
    auto t = read_csv(out, {"v", "u", "weight"});
    EXPECT_EQ(t.rows.size(), static_cast<std::size_t>(n * n));
  }
  EXPECT_NE(log.str().find("mean="), std::string::npos);
  EXPECT_THROW(cmd_dump_mask(12, {}, log), ConfigError);
}

TEST(Binary, ExitCodes) {
  if (!std::getenv("HV3D_CLI")) GTEST_SKIP() << "HV3D_CLI not set";
  auto dir = testing::scratch_dir("cli_binary");
  auto man = make_corpus(dir, 1);
  const std::string m = "\"" + man.string() + "\"";
  EXPECT_EQ(run_cli("score --manifest " + m + " --ref alpha --dist alpha"), 0);
  EXPECT_EQ(run_cli("dump-mask --block-size 8"), 0);
  EXPECT_EQ(run_cli("dump-mask --block-size 12"), 2);
  EXPECT_EQ(run_cli("score --manifest " + m + " --ref alpha --dist alpha --beta 0"), 2);
  EXPECT_EQ(run_cli("distort --manifest " + m + " --spec wobble:1 --out \"" +
                    (dir / "o").string() + "\""),
            2);
  EXPECT_EQ(run_cli("score --manifest \"" + (dir / "missing.txt").string() +
                    "\" --ref a --dist b"),
            3);
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
}

}  // namespace
}  // namespace hv3d
