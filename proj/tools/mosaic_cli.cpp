// mosaic: build mosaics from frame sequences, score feature matching against
// ground truth, and generate synthetic test sequences.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mosaic/evaluation.hpp"
#include "mosaic/io.hpp"
#include "mosaic/pipeline.hpp"
#include "mosaic/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRegistration = 3;

struct BuildArgs {
  std::string input;
  std::string output;
  std::string config;
  std::string report;
  std::string debug_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> block_size;
  std::optional<int> search_range;
  std::optional<int> offset_threshold;
  bool no_color_align = false;
  std::optional<int> max_keypoints;
  std::optional<double> contrast_threshold;
  std::optional<int> blend_levels;
  std::string blend;
  bool timings = false;
};

struct EvalArgs {
  std::string left;
  std::string right;
  std::vector<double> gt;
  double tolerance = 3.0;
  std::string config;
  std::string csv;
};

struct SynthArgs {
  std::string spec;
  std::string out;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw mosaic::Error(mosaic::ErrorCode::Io, "cannot write " + path);
  out << text;
}

int run_build(const BuildArgs& a) {
  mosaic::PipelineConfig cfg;
  if (!a.config.empty()) mosaic::apply_config(mosaic::KeyValueConfig::load(a.config), cfg);
  if (a.seed) cfg.ransac.rng_seed = *a.seed;
  if (a.block_size) cfg.block.block_size = *a.block_size;
  if (a.search_range) cfg.block.search_range = *a.search_range;
  if (a.offset_threshold) cfg.offset_threshold = *a.offset_threshold;
  if (a.no_color_align) cfg.color_align = false;
  if (a.max_keypoints) cfg.detect.max_keypoints = *a.max_keypoints;
  if (a.contrast_threshold) cfg.detect.contrast_threshold = *a.contrast_threshold;
  if (a.blend_levels) cfg.blend_levels = *a.blend_levels;
  if (a.blend == "none") cfg.blend = mosaic::BlendMode::None;
  if (a.blend == "multiband") cfg.blend = mosaic::BlendMode::Multiband;
  if (a.timings) cfg.report_timings = true;
  cfg.debug_dir = a.debug_dir;

  const auto frames = mosaic::load_frames(a.input);
  if (frames.empty()) {
    std::cerr << "error: no .png/.ppm frames match '" << a.input << "'\n";
    return kExitUsage;
  }
  const auto result = mosaic::build_mosaic(frames, cfg);
  const std::string report = mosaic::to_json(result.report).dump(2) + "\n";
  if (a.report.empty()) std::cout << report;
  else write_text(a.report, report);
  if (!result.report.ok()) {
    std::cerr << "registration failed: " << result.report.error << '\n';
    return kExitRegistration;
  }
  mosaic::write_image(a.output, result.materialize());
  return kExitOk;
}

int run_eval(const EvalArgs& a) {
  if (a.gt.size() != 9) {
    std::cerr << "error: --gt-homography needs 9 values\n";
    return kExitUsage;
  }
  mosaic::EvaluationConfig cfg;
  if (!a.config.empty()) {
    mosaic::PipelineConfig p;
    mosaic::apply_config(mosaic::KeyValueConfig::load(a.config), p);
    cfg.detect = p.detect;
    cfg.descriptor = p.descriptor;
    cfg.nndr_ratio = p.nndr_ratio;
    cfg.ransac = p.ransac;
  }
  std::array<double, 9> h{};
  std::copy(a.gt.begin(), a.gt.end(), h.begin());
  const mosaic::GroundTruth gt{mosaic::Homography::from_row_major(h), a.tolerance};
  const auto left = mosaic::to_grayscale(mosaic::read_image(a.left));
  const auto right = mosaic::to_grayscale(mosaic::read_image(a.right));
  const auto row = mosaic::evaluate_pair(left, right, gt, cfg);

  nlohmann::ordered_json j;
  j["left_keypoints"] = row.left_keypoints;
  j["right_keypoints"] = row.right_keypoints;
  j["matches"] = row.matches;
  j["inliers"] = row.inliers;
  j["correct_matches"] = row.correct_matches;
  j["gt_correspondences"] = row.gt_correspondences;
  j["repeatability"] = row.repeatability;
  j["recall"] = row.recall;
  j["one_minus_precision"] = row.one_minus_precision;
  std::cout << j.dump(2) << '\n';
  if (!a.csv.empty()) write_text(a.csv, mosaic::metric_csv_header() + "\n" + mosaic::metric_csv_row(row) + "\n");
  return kExitOk;
}

int run_synth(const SynthArgs& a) {
  const auto spec = mosaic::parse_scene_spec(mosaic::KeyValueConfig::load(a.spec));
  const auto seq = mosaic::generate_sequence(spec);
  namespace fs = std::filesystem;
  fs::create_directories(a.out);

  nlohmann::ordered_json manifest;
  manifest["seed"] = spec.seed;
  manifest["frame_width"] = spec.frame_width;
  manifest["frame_height"] = spec.frame_height;
  auto names = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.png", i);
    mosaic::write_png((fs::path(a.out) / name).string(), seq.frames[i].rgb);
    names.push_back(name);
  }
  manifest["frames"] = std::move(names);
  auto dump = [](const std::vector<mosaic::Homography>& hs) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& h : hs) arr.push_back(mosaic::to_json(h));
    return arr;
  };
  manifest["pairwise_homographies"] = dump(seq.pairwise);
  manifest["pairwise_convention"] = "entry i-1 maps frame i coordinates to frame i-1 coordinates";
  manifest["global_homographies"] = dump(seq.global);
  manifest["frame_to_scene"] = dump(seq.frame_to_scene);
  mosaic::write_png((fs::path(a.out) / "scene.png").string(), mosaic::quantize(seq.scene));
  manifest["scene"] = "scene.png";
  write_text((fs::path(a.out) / "manifest.json").string(), manifest.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seam-minimizing mosaics from overlapping video frames"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* cmd_build = app.add_subcommand("build", "Build a mosaic from a frame directory or glob");
  cmd_build->add_option("--input", build.input, "Frame directory or glob pattern")->required();
  cmd_build->add_option("--output", build.output, "Output mosaic (.png or .ppm)")->required();
  cmd_build->add_option("--config", build.config, "key=value configuration file");
  cmd_build->add_option("--report", build.report, "JSON report path (default: stdout)");
  cmd_build->add_option("--debug-dir", build.debug_dir, "Directory for aligned frames, keypoints, matches");
  cmd_build->add_option("--seed", build.seed, "RANSAC seed");
  cmd_build->add_option("--block-size", build.block_size, "SAD block size (odd)");
  cmd_build->add_option("--search-range", build.search_range, "SAD horizontal search range, px");
  cmd_build->add_option("--offset-threshold", build.offset_threshold, "Keyframe offset threshold, px");
  cmd_build->add_flag("--no-color-align", build.no_color_align, "Skip color alignment");
  cmd_build->add_option("--max-keypoints", build.max_keypoints, "Keypoint cap per frame");
  cmd_build->add_option("--contrast-threshold", build.contrast_threshold, "DoG contrast threshold");
  cmd_build->add_option("--blend-levels", build.blend_levels, "Pyramid levels (0 = auto)");
  cmd_build->add_option("--blend", build.blend, "none|multiband")->check(CLI::IsMember({"none", "multiband"}));
  cmd_build->add_flag("--timings", build.timings, "Include stage timings in the report");

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "Repeatability / recall / 1-precision against a known homography");
  cmd_eval->add_option("--left", eval.left, "Left image")->required();
  cmd_eval->add_option("--right", eval.right, "Right image")->required();
  cmd_eval->add_option("--gt-homography", eval.gt, "Left->right homography, 9 reals row-major")
      ->required()
      ->expected(9);
  cmd_eval->add_option("--tolerance", eval.tolerance, "Correspondence radius, px");
  cmd_eval->add_option("--config", eval.config, "key=value configuration file");
  cmd_eval->add_option("--csv", eval.csv, "Also write the metric row as CSV");

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic sequence with ground truth");
  cmd_synth->add_option("--spec", synth.spec, "Scene spec (key=value)")->required();
  cmd_synth->add_option("--out", synth.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cmd_build) return run_build(build);
    if (*cmd_eval) return run_eval(eval);
    if (*cmd_synth) return run_synth(synth);
  } catch (const mosaic::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == mosaic::ErrorCode::InvalidArgument || e.code() == mosaic::ErrorCode::SpecInvalid
               ? kExitUsage
               : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
