#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mosaic/blending.hpp"
#include "mosaic/color_alignment.hpp"
#include "mosaic/config.hpp"
#include "mosaic/cslbp.hpp"
#include "mosaic/feature_detect.hpp"
#include "mosaic/frame_selection.hpp"
#include "mosaic/io.hpp"
#include "mosaic/registration.hpp"

namespace mosaic {

enum class BlendMode { None, Multiband };

struct PipelineConfig {
  BlockMatchConfig block;
  int offset_threshold = 0;  // 0: 25% of the frame width
  bool color_align = true;
  ScaleSpaceConfig detect;
  CslbpParams descriptor;
  double nndr_ratio = 0.8;
  RansacConfig ransac;
  BlendMode blend = BlendMode::Multiband;
  int blend_levels = 0;  // 0: derived from each pair's overlap
  bool report_timings = false;
  std::string debug_dir;  // empty: no debug output
};

/// Applies every recognised key; unknown keys are a usage error.
inline void apply_config(const KeyValueConfig& kv, PipelineConfig& cfg) {
  kv.get("block_size", cfg.block.block_size);
  kv.get("search_range", cfg.block.search_range);
  kv.get("offset_threshold", cfg.offset_threshold);
  kv.get("color_align", cfg.color_align);
  kv.get("octaves", cfg.detect.octaves);
  kv.get("scales_per_octave", cfg.detect.scales_per_octave);
  kv.get("base_sigma", cfg.detect.base_sigma);
  kv.get("contrast_threshold", cfg.detect.contrast_threshold);
  kv.get("edge_ratio", cfg.detect.edge_ratio_threshold);
  kv.get("max_keypoints", cfg.detect.max_keypoints);
  kv.get("cslbp_radius", cfg.descriptor.radius);
  kv.get("cslbp_neighbors", cfg.descriptor.neighbors);
  kv.get("cslbp_threshold", cfg.descriptor.threshold);
  kv.get("cslbp_grid", cfg.descriptor.grid);
  kv.get("region_scale", cfg.descriptor.region_scale);
  kv.get("nndr_ratio", cfg.nndr_ratio);
  kv.get("ransac_p", cfg.ransac.success_prob);
  kv.get("ransac_outlier_ratio", cfg.ransac.assumed_outlier_ratio);
  kv.get("ransac_inlier_px", cfg.ransac.inlier_threshold);
  kv.get("ransac_max_iter", cfg.ransac.max_iterations);
  kv.get("seed", cfg.ransac.rng_seed);
  std::string blend;
  kv.get("blend", blend);
  if (blend == "none") cfg.blend = BlendMode::None;
  else if (blend == "multiband") cfg.blend = BlendMode::Multiband;
  else if (!blend.empty()) throw Error(ErrorCode::InvalidArgument, "blend must be none|multiband");
  kv.get("blend_levels", cfg.blend_levels);
  kv.get("report_timings", cfg.report_timings);
  kv.require_all_used();
}

/// Chains pairwise transforms (entry k-1 maps frame k into frame k-1) into
/// global ones mapping frame k into frame 0. Entry 0 is the identity.
inline std::vector<Homography> compose_transforms(const std::vector<Homography>& pairwise) {
  std::vector<Homography> global{Homography::identity()};
  for (const auto& h : pairwise) global.push_back(global.back() * h);
  return global;
}

struct PairReport {
  std::size_t from = 0;  // input index of the earlier kept frame
  std::size_t to = 0;    // input index of the later kept frame
  std::size_t query_keypoints = 0;
  std::size_t train_keypoints = 0;
  std::size_t matches = 0;
  std::size_t inliers = 0;
  double mean_reproj_error = 0.0;
  int iterations = 0;
  std::optional<Homography> homography;  // frame `to` -> frame `from`
};

struct MosaicReport {
  std::string status = "ok";
  std::string error;
  std::optional<std::pair<std::size_t, std::size_t>> failed_pair;
  std::size_t input_frames = 0;
  std::vector<std::size_t> selected;
  std::vector<PairReport> pairs;
  int canvas_width = 0;
  int canvas_height = 0;
  std::vector<std::pair<std::string, double>> timings_ms;
  bool include_timings = false;

  bool ok() const { return status == "ok"; }
};

inline nlohmann::ordered_json to_json(const Homography& h) {
  auto v = h.row_major();
  return nlohmann::ordered_json(std::vector<double>(v.begin(), v.end()));
}

inline nlohmann::ordered_json to_json(const MosaicReport& r) {
  nlohmann::ordered_json j;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  if (r.failed_pair) j["failed_pair"] = {r.failed_pair->first, r.failed_pair->second};
  j["input_frames"] = r.input_frames;
  j["selected_frames"] = r.selected;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : r.pairs) {
    nlohmann::ordered_json e;
    e["from"] = p.from;
    e["to"] = p.to;
    e["query_keypoints"] = p.query_keypoints;
    e["train_keypoints"] = p.train_keypoints;
    e["matches"] = p.matches;
    e["inliers"] = p.inliers;
    e["mean_reproj_error"] = p.mean_reproj_error;
    e["iterations"] = p.iterations;
    if (p.homography) e["homography"] = to_json(*p.homography);
    pairs.push_back(std::move(e));
  }
  j["pairs"] = std::move(pairs);
  j["canvas"] = {{"width", r.canvas_width}, {"height", r.canvas_height}};
  if (r.include_timings) {
    nlohmann::ordered_json t;
    for (const auto& [stage, ms] : r.timings_ms) t[stage] = ms;
    j["timings_ms"] = std::move(t);
  }
  return j;
}

struct MosaicResult {
  MosaicReport report;
  RealImage mosaic;  // RGB [0,1], unclamped until quantize()
  Mask coverage;
  Mask seam;  // 1 on pixels adjacent to a hard seam transition
  std::vector<Homography> global;  // kept frame k -> frame 0
  Point2 canvas_offset;            // frame-0 coordinates -> canvas coordinates

  Rgb8Image materialize() const { return quantize(mosaic); }
};

/// Flat float32 matrix (row-major, little endian) plus a JSON header.
inline void write_descriptor_dump(const std::string& prefix, const std::vector<Descriptor>& descs) {
  const std::size_t cols = descs.empty() ? 0 : descs.front().values.size();
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw Error(ErrorCode::Io, "cannot write " + prefix + ".bin");
  for (const auto& d : descs)
    bin.write(reinterpret_cast<const char*>(d.values.data()), static_cast<std::streamsize>(cols * sizeof(float)));
  nlohmann::ordered_json header;
  header["rows"] = descs.size();
  header["cols"] = cols;
  header["dtype"] = "float32";
  header["order"] = "row-major";
  auto kps = nlohmann::ordered_json::array();
  for (const auto& d : descs) kps.push_back({d.keypoint.x, d.keypoint.y, d.keypoint.sigma, d.keypoint.response});
  header["keypoints"] = std::move(kps);
  std::ofstream(prefix + ".json") << header.dump(2) << '\n';
}

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(MosaicReport& r) : report_(r), start_(std::chrono::steady_clock::now()) {}
  void lap(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    report_.timings_ms.emplace_back(stage, std::chrono::duration<double, std::milli>(now - start_).count());
    start_ = now;
  }

 private:
  MosaicReport& report_;
  std::chrono::steady_clock::time_point start_;
};

inline RealImage clamp_to_unit(const RealImage& img, double scale) {
  RealImage out(img.width(), img.height(), img.channels());
  auto s = img.data();
  auto d = out.data();
  for (std::size_t i = 0; i < s.size(); ++i) d[i] = std::clamp(s[i] * scale, 0.0, 1.0);
  return out;
}

inline Rgb8Image keypoint_overlay(const RealImage& img, const std::vector<Keypoint>& kps) {
  Rgb8Image out = quantize(img);
  for (const auto& kp : kps) {
    const int cx = static_cast<int>(std::lround(kp.x));
    const int cy = static_cast<int>(std::lround(kp.y));
    const int r = std::max(2, static_cast<int>(std::lround(kp.sigma)));
    for (int d = -r; d <= r; ++d)
      for (const auto& [x, y] : {std::pair{cx + d, cy}, std::pair{cx, cy + d}})
        if (out.contains(x, y)) {
          out.at(x, y, 0) = 255;
          out.at(x, y, 1) = 0;
          out.at(x, y, 2) = 0;
        }
  }
  return out;
}

}  // namespace detail

/// Selection, chained color alignment, pairwise registration, composition,
/// warping and sequential blending. A pair that cannot be registered yields a
/// report with status "registration_failed" and an empty mosaic.
inline MosaicResult build_mosaic(const std::vector<Frame>& frames, const PipelineConfig& cfg) {
  if (frames.empty()) throw Error(ErrorCode::InvalidArgument, "no input frames");
  const int fw = frames.front().width();
  const int fh = frames.front().height();
  for (const auto& f : frames)
    if (f.width() != fw || f.height() != fh) throw Error(ErrorCode::DimensionMismatch, "frames differ in size");

  MosaicResult result;
  MosaicReport& report = result.report;
  report.include_timings = cfg.report_timings;
  report.input_frames = frames.size();
  detail::StageTimer timer(report);
  const bool debug = !cfg.debug_dir.empty();
  if (debug) std::filesystem::create_directories(cfg.debug_dir);
  auto debug_path = [&](const std::string& name) { return (std::filesystem::path(cfg.debug_dir) / name).string(); };

  // Keyframe selection.
  std::vector<std::size_t> kept{0};
  if (frames.size() > 1) {
    const int threshold = cfg.offset_threshold > 0 ? cfg.offset_threshold : default_offset_threshold(fw);
    BlockMatchConfig block = cfg.block;
    if (block.search_range == 0) block.search_range = threshold;
    if (block.search_range >= fw) throw Error(ErrorCode::InvalidArgument, "search_range must be < frame width");
    std::vector<GrayImage> grays;
    for (const auto& f : frames) grays.push_back(to_grayscale(f));
    kept = select_frame_indices(grays, block, threshold).kept;
  }
  for (std::size_t k : kept) report.selected.push_back(frames[k].index);
  timer.lap("selection");

  // Chained color alignment; real values, clamped only for the working copy.
  std::vector<RealImage> work;
  {
    RealImage previous = to_real(frames[kept[0]].rgb, 1.0);
    work.push_back(detail::clamp_to_unit(previous, 1.0 / 255.0));
    for (std::size_t k = 1; k < kept.size(); ++k) {
      RealImage current = cfg.color_align ? align_channels(frames[kept[k]].rgb, channel_stats(previous))
                                          : to_real(frames[kept[k]].rgb, 1.0);
      work.push_back(detail::clamp_to_unit(current, 1.0 / 255.0));
      previous = std::move(current);
    }
    if (debug)
      for (std::size_t k = 0; k < kept.size(); ++k)
        write_png(debug_path("aligned_" + std::to_string(kept[k]) + ".png"), quantize(work[k]));
  }
  timer.lap("color_alignment");

  // Features per kept frame, then consecutive-pair registration.
  std::vector<std::vector<Descriptor>> descriptors;
  for (std::size_t k = 0; k < kept.size() && kept.size() > 1; ++k) {
    const GrayImage gray = to_grayscale(work[k]);
    const auto kps = detect_keypoints(gray, cfg.detect);
    descriptors.push_back(describe_all(gray, kps, cfg.descriptor));
    if (debug) {
      write_png(debug_path("keypoints_" + std::to_string(kept[k]) + ".png"), detail::keypoint_overlay(work[k], kps));
      write_descriptor_dump(debug_path("descriptors_" + std::to_string(kept[k])), descriptors.back());
    }
  }
  std::vector<Homography> pairwise;
  nlohmann::ordered_json match_dump = nlohmann::ordered_json::array();
  for (std::size_t k = 1; k < kept.size(); ++k) {
    PairReport pr;
    pr.from = frames[kept[k - 1]].index;
    pr.to = frames[kept[k]].index;
    const auto& query = descriptors[k];
    const auto& train = descriptors[k - 1];
    pr.query_keypoints = query.size();
    pr.train_keypoints = train.size();
    const auto matches = match_nndr(query, train, cfg.nndr_ratio);
    pr.matches = matches.size();
    std::vector<Point2> pq, pt;
    for (const auto& d : query) pq.push_back({d.keypoint.x, d.keypoint.y});
    for (const auto& d : train) pt.push_back({d.keypoint.x, d.keypoint.y});
    try {
      const auto reg = estimate_homography(matches, pq, pt, cfg.ransac);
      pr.inliers = reg.inlier_count();
      pr.mean_reproj_error = reg.mean_reproj_error;
      pr.iterations = reg.iterations_used;
      pr.homography = reg.homography;
      pairwise.push_back(reg.homography);
      if (debug) {
        nlohmann::ordered_json m;
        m["from"] = pr.from;
        m["to"] = pr.to;
        auto list = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < matches.size(); ++i)
          list.push_back({{"query", matches[i].query_idx}, {"train", matches[i].train_idx},
                          {"query_xy", {pq[matches[i].query_idx].x, pq[matches[i].query_idx].y}},
                          {"train_xy", {pt[matches[i].train_idx].x, pt[matches[i].train_idx].y}},
                          {"distance", matches[i].distance}, {"ratio", matches[i].ratio},
                          {"inlier", bool(reg.inlier_mask[i])}});
        m["matches"] = std::move(list);
        match_dump.push_back(std::move(m));
      }
      report.pairs.push_back(pr);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoConsensus && e.code() != ErrorCode::InsufficientMatches) throw;
      report.pairs.push_back(pr);
      report.status = "registration_failed";
      report.error = e.what();
      report.failed_pair = {pr.from, pr.to};
      timer.lap("registration");
      return result;
    }
  }
  if (debug) std::ofstream(debug_path("matches.json")) << match_dump.dump(2) << '\n';
  timer.lap("registration");

  result.global = compose_transforms(pairwise);

  // Canvas = bounding box of every warped frame corner.
  constexpr double kEps = 1e-6;
  double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
  for (const auto& g : result.global)
    for (const Point2 c : {Point2{0, 0}, Point2{double(fw - 1), 0}, Point2{0, double(fh - 1)},
                           Point2{double(fw - 1), double(fh - 1)}}) {
      const Point2 p = g.apply(c);
      min_x = std::min(min_x, p.x);
      min_y = std::min(min_y, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
  const double ox = -std::floor(min_x + kEps);
  const double oy = -std::floor(min_y + kEps);
  const double cw = std::ceil(max_x - kEps) + ox + 1;
  const double ch = std::ceil(max_y - kEps) + oy + 1;
  if (!(cw >= 1 && ch >= 1) || cw * ch > 64.0 * fw * fh * static_cast<double>(kept.size())) {
    throw Error(ErrorCode::InvalidArgument, "registration produced an implausible canvas");
  }
  const CanvasSize canvas{static_cast<int>(cw), static_cast<int>(ch)};
  result.canvas_offset = {ox, oy};
  report.canvas_width = canvas.width;
  report.canvas_height = canvas.height;
  timer.lap("compose");

  // Warp and fold every frame into the accumulator.
  const Homography to_canvas = Homography::translation(ox, oy);
  WarpResult acc = warp_perspective(work[0], to_canvas * result.global[0], canvas);
  result.seam = Mask(canvas.width, canvas.height, 1, 0);
  for (std::size_t k = 1; k < kept.size(); ++k) {
    WarpResult next = warp_perspective(work[k], to_canvas * result.global[k], canvas);
    const GrayImage mask = pair_blend_mask(acc.mask, next.mask);

    RealImage img1 = acc.image;
    RealImage img2 = next.image;
    int ov_x0 = canvas.width, ov_y0 = canvas.height, ov_x1 = -1, ov_y1 = -1;
    for (int y = 0; y < canvas.height; ++y)
      for (int x = 0; x < canvas.width; ++x) {
        const bool a = acc.mask.at(x, y) != 0;
        const bool b = next.mask.at(x, y) != 0;
        for (int c = 0; c < 3; ++c) {
          if (!a && b) img1.at(x, y, c) = next.image.at(x, y, c);
          if (a && !b) img2.at(x, y, c) = acc.image.at(x, y, c);
        }
        if (a && b) {
          ov_x0 = std::min(ov_x0, x);
          ov_y0 = std::min(ov_y0, y);
          ov_x1 = std::max(ov_x1, x);
          ov_y1 = std::max(ov_y1, y);
          for (const auto& [nx, ny] : {std::pair{x + 1, y}, std::pair{x, y + 1}}) {
            if (!acc.mask.contains(nx, ny) || !acc.mask.at(nx, ny) || !next.mask.at(nx, ny)) continue;
            if (mask.at(nx, ny) != mask.at(x, y)) {
              result.seam.at(x, y) = 1;
              result.seam.at(nx, ny) = 1;
            }
          }
        }
      }

    RealImage blended;
    if (cfg.blend == BlendMode::None) {
      blended = blend_hard(img1, img2, mask);
    } else {
      int levels = cfg.blend_levels;
      if (levels <= 0) {
        levels = ov_x1 >= ov_x0 ? default_blend_levels(ov_x1 - ov_x0 + 1, ov_y1 - ov_y0 + 1) : 2;
      }
      levels = std::min(levels, max_pyramid_levels(canvas.width, canvas.height));
      blended = blend_multiband(img1, img2, mask, levels);
    }
    for (int y = 0; y < canvas.height; ++y)
      for (int x = 0; x < canvas.width; ++x) {
        const bool covered = acc.mask.at(x, y) || next.mask.at(x, y);
        acc.mask.at(x, y) = covered ? 1 : 0;
        if (!covered)
          for (int c = 0; c < 3; ++c) blended.at(x, y, c) = 0.0;
      }
    acc.image = std::move(blended);
  }
  result.mosaic = std::move(acc.image);
  result.coverage = std::move(acc.mask);
  timer.lap("warp_blend");
  return result;
}

inline MosaicResult build_mosaic(const std::string& input, const PipelineConfig& cfg) {
  const auto frames = load_frames(input);
  if (frames.empty()) throw Error(ErrorCode::InvalidArgument, "no decodable frames match " + input);
  return build_mosaic(frames, cfg);
}

}  // namespace mosaic
