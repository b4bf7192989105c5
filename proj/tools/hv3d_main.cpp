// hv3d: stereoscopic video quality scoring, distortion synthesis, weight
// calibration and metric-vs-MOS evaluation.
//
// Exit codes: 0 success, 2 configuration error, 3 ingestion error,
// 4 computation error, 1 anything else.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hv3d/commands.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kIngest = 3, kCompute = 4 };

struct MetricFlags {
  std::string profile = "hd";
  std::optional<int> block_size;
  std::optional<int> fovea;
  double beta = 0.7;
  int search_x = 64;
  int search_y = 4;
  std::string cost = "sad";
  std::string weights;
  unsigned threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "Preset: hd (16x16 blocks, 64 fovea) or sd (8x8, 32)")
        ->check(CLI::IsMember({"hd", "sd"}));
    app->add_option("--block-size", block_size, "Block size, 8 or 16 (overrides profile)");
    app->add_option("--fovea", fovea, "Fovea window side in pixels (overrides profile)");
    app->add_option("--beta", beta, "Exponent on depth VIF")->capture_default_str();
    app->add_option("--search-x", search_x, "Horizontal block search range")->capture_default_str();
    app->add_option("--search-y", search_y, "Vertical block search range")->capture_default_str();
    app->add_option("--match-cost", cost, "Block matching cost: sad or ssd")
        ->check(CLI::IsMember({"sad", "ssd"}));
    app->add_option("--weights", weights, "w1,w2,w3,w4 or a weights CSV file");
    app->add_option("--threads", threads, "Worker threads, 0 = hardware concurrency");
  }

  hv3d::RunConfig build() const {
    hv3d::RunConfig cfg;
    cfg.metric = profile == "sd" ? hv3d::MetricConfig::sd() : hv3d::MetricConfig::hd();
    if (block_size) cfg.metric.block_size = *block_size;
    if (fovea) cfg.metric.fovea = *fovea;
    cfg.metric.beta = beta;
    cfg.metric.search = {search_x, search_y,
                         cost == "ssd" ? hv3d::MatchCost::ssd : hv3d::MatchCost::sad};
    cfg.metric.threads = threads;
    if (!weights.empty()) cfg.weights = hv3d::parse_weights(weights);
    cfg.validate();
    return cfg;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HV3D full-reference stereoscopic video quality toolkit"};
  app.require_subcommand(1);

  // score
  MetricFlags score_flags;
  std::string score_manifest, ref_label, dist_label, score_out;
  bool score_all = false;
  auto* score = app.add_subcommand("score", "Score a distorted sequence against its reference");
  score->add_option("--manifest", score_manifest, "Sequence manifest")->required();
  score->add_option("--ref", ref_label, "Reference label");
  score->add_option("--dist", dist_label, "Distorted label");
  score->add_flag("--all", score_all,
                  "Score every distorted entry against its reference; --out gets "
                  "label,distortion,score rows");
  score->add_option("--out", score_out, "Output CSV");
  score_flags.attach(score);

  // distort
  std::string distort_manifest, distort_out;
  std::vector<std::string> spec_texts;
  std::uint64_t seed = 1;
  bool luma_only = false;
  unsigned distort_threads = 0;
  auto* distort = app.add_subcommand("distort", "Synthesize a distortion corpus");
  distort->add_option("--manifest", distort_manifest, "Reference manifest")->required();
  distort->add_option("--spec", spec_texts,
                      "noise:VAR[:SEED] | blur:SIZE:SIGMA | shift:DELTA | external:ID:PATTERN "
                      "(repeatable; default noise:0.01 blur:4:4 shift:20)");
  distort->add_option("--seed", seed, "Default noise seed")->capture_default_str();
  distort->add_flag("--noise-luma-only", luma_only, "Restrict noise to the luma plane");
  distort->add_option("--out", distort_out, "Output directory")->required();
  distort->add_option("--threads", distort_threads, "Worker threads, 0 = hardware concurrency");

  // calibrate
  MetricFlags cal_flags;
  std::string cal_manifest, cal_mos, cal_out, cal_report;
  auto* calibrate = app.add_subcommand("calibrate", "Fit w1..w4 to MOS by least squares");
  calibrate->add_option("--manifest", cal_manifest, "Corpus manifest")->required();
  calibrate->add_option("--mos", cal_mos, "MOS CSV (label,distortion,mos)")->required();
  calibrate->add_option("--out", cal_out, "Weights CSV output")->required();
  calibrate->add_option("--report", cal_report, "Per-row residual CSV output");
  cal_flags.attach(calibrate);

  // evaluate
  std::string eval_scores, eval_mos, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Spearman and logistic fit of scores vs MOS");
  evaluate->add_option("--scores", eval_scores, "Scores CSV (label,distortion,score)")->required();
  evaluate->add_option("--mos", eval_mos, "MOS CSV (label,distortion,mos)")->required();
  evaluate->add_option("--out", eval_out, "Plot-ready CSV of score,mos,fitted");

  // dump-mask
  int mask_size = 16;
  std::string mask_out;
  auto* dump = app.add_subcommand("dump-mask", "Print the CSF weighting mask");
  dump->add_option("--block-size", mask_size, "8 or 16")->capture_default_str();
  dump->add_option("--out", mask_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*score) {
      auto cfg = score_flags.build();
      if (score_all) {
        hv3d::cmd_score_all(score_manifest, cfg, score_out, std::cout);
      } else {
        if (ref_label.empty() || dist_label.empty())
          throw hv3d::ConfigError("score needs --ref and --dist (or --all)");
        hv3d::cmd_score(score_manifest, ref_label, dist_label, cfg, score_out, std::cout);
      }
    } else if (*distort) {
      if (spec_texts.empty()) spec_texts = {"noise:0.01", "blur:4:4", "shift:20"};
      std::vector<hv3d::DistortionSpec> specs;
      for (const auto& t : spec_texts) {
        auto s = hv3d::parse_distortion_spec(t, seed);
        s.luma_only = luma_only;
        specs.push_back(std::move(s));
      }
      hv3d::cmd_distort(distort_manifest, specs, distort_out, distort_threads, std::cout);
    } else if (*calibrate) {
      hv3d::cmd_calibrate(cal_manifest, cal_mos, cal_flags.build(), cal_out, cal_report,
                          std::cout);
    } else if (*evaluate) {
      hv3d::cmd_evaluate(eval_scores, eval_mos, eval_out, std::cout);
    } else if (*dump) {
      hv3d::cmd_dump_mask(mask_size, mask_out, std::cout);
    }
  } catch (const hv3d::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const hv3d::IngestError& e) {
    std::cerr << "ingestion error: " << e.what() << '\n';
    return kIngest;
  } catch (const hv3d::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCompute;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kOther;
  }
  return kOk;
}
