#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "mosaic/config.hpp"
#include "mosaic/imaging.hpp"

namespace mosaic {

struct ColorCast {
  std::array<double, 3> gain{1.0, 1.0, 1.0};
  std::array<double, 3> bias{0.0, 0.0, 0.0};  // [0,1] intensity units
};

struct ParallaxBand {
  int y0 = 0;  // scene rows [y0, y1)
  int y1 = 0;
  double offset_px = 0.0;  // extra horizontal shift per frame
};

/// Textured planar scene viewed by a moving camera.
struct SceneSpec {
  std::uint64_t seed = 1;
  int scene_width = 400;
  int scene_height = 200;
  int frame_width = 160;
  int frame_height = 120;
  int frame_count = 4;
  Point2 origin{20.0, 40.0};  // scene position of frame 0's top-left pixel
  Point2 step{5.0, 0.0};      // per-frame translation of the camera window
  /// Optional explicit frame->scene homographies; overrides origin/step.
  std::vector<Homography> frame_to_scene;
  double texture_sigma = 2.0;         // fine detail scale
  double texture_coarse_sigma = 6.0;  // large-blob scale
  double texture_fine_weight = 0.8;
  double texture_contrast = 0.25;  // luminance std-dev scale
  double noise_sigma = 0.0;  // [0,1] units
  std::vector<ColorCast> casts;  // per frame; missing entries are identity
  std::optional<ParallaxBand> parallax;
};

struct SyntheticSequence {
  std::vector<Frame> frames;
  std::vector<Homography> pairwise;        // [i-1]: frame i -> frame i-1
  std::vector<Homography> global;          // [i]: frame i -> frame 0
  std::vector<Homography> frame_to_scene;  // [i]: frame i -> scene
  RealImage scene;                         // background layer, RGB [0,1]
  RealImage foreground;                    // parallax layer (same size)
};

namespace detail {

inline RealImage noise_field(std::mt19937_64& rng, int w, int h, double sigma) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  RealImage f(w, h, 1);
  for (double& v : f.buffer()) v = uni(rng);
  f = gaussian_blur(f, sigma);
  double mean = 0.0;
  for (double v : f.buffer()) mean += v;
  mean /= static_cast<double>(f.pixel_count());
  double ss = 0.0;
  for (double v : f.buffer()) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / f.pixel_count());
  for (double& v : f.buffer()) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return f;
}

/// Band-limited random RGB texture in roughly [0.1, 0.8].
inline RealImage make_texture(std::mt19937_64& rng, int w, int h, const SceneSpec& spec) {
  const RealImage fine = noise_field(rng, w, h, spec.texture_sigma);
  const RealImage coarse = noise_field(rng, w, h, spec.texture_coarse_sigma);
  const RealImage chroma1 = noise_field(rng, w, h, 3.0 * spec.texture_coarse_sigma);
  const RealImage chroma2 = noise_field(rng, w, h, 3.0 * spec.texture_coarse_sigma);
  const double a = spec.texture_fine_weight;
  RealImage out(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double l = a * fine.at(x, y) + (1.0 - a) * coarse.at(x, y);
      const double lum = std::clamp(0.45 + spec.texture_contrast * l, 0.12, 0.78);
      out.at(x, y, 0) = std::clamp(lum + 0.02 * chroma1.at(x, y), 0.1, 0.8);
      out.at(x, y, 1) = std::clamp(lum + 0.02 * chroma2.at(x, y), 0.1, 0.8);
      out.at(x, y, 2) = std::clamp(0.85 * lum + 0.05, 0.1, 0.8);
    }
  return out;
}

}  // namespace detail

inline std::vector<Homography> frame_to_scene_transforms(const SceneSpec& spec) {
  if (!spec.frame_to_scene.empty()) {
    if (static_cast<int>(spec.frame_to_scene.size()) != spec.frame_count) {
      throw Error(ErrorCode::SpecInvalid, "frame_to_scene count differs from frame_count");
    }
    return spec.frame_to_scene;
  }
  std::vector<Homography> out;
  for (int i = 0; i < spec.frame_count; ++i)
    out.push_back(Homography::translation(spec.origin.x + i * spec.step.x, spec.origin.y + i * spec.step.y));
  return out;
}

inline void validate(const SceneSpec& spec) {
  if (spec.scene_width < 1 || spec.scene_height < 1 || spec.frame_width < 1 || spec.frame_height < 1 ||
      spec.frame_count < 1) {
    throw Error(ErrorCode::SpecInvalid, "sizes and frame count must be positive");
  }
  if (spec.noise_sigma < 0.0 || spec.texture_sigma <= 0.0 || spec.texture_coarse_sigma <= 0.0 ||
      spec.texture_fine_weight < 0.0 || spec.texture_fine_weight > 1.0 || spec.texture_contrast < 0.0) {
    throw Error(ErrorCode::SpecInvalid, "invalid texture or noise parameters");
  }
  if (spec.parallax && (spec.parallax->y0 < 0 || spec.parallax->y1 > spec.scene_height ||
                        spec.parallax->y0 >= spec.parallax->y1)) {
    throw Error(ErrorCode::SpecInvalid, "parallax band outside the scene");
  }
  const auto transforms = frame_to_scene_transforms(spec);
  for (int i = 0; i < spec.frame_count; ++i) {
    const double extra = spec.parallax ? std::abs(spec.parallax->offset_px * i) : 0.0;
    for (const Point2 c : {Point2{0, 0}, Point2{double(spec.frame_width - 1), 0},
                           Point2{0, double(spec.frame_height - 1)},
                           Point2{double(spec.frame_width - 1), double(spec.frame_height - 1)}}) {
      const Point2 s = transforms[i].apply(c);
      if (s.x - extra < 0.0 || s.y < 0.0 || s.x + extra > spec.scene_width - 1 ||
          s.y > spec.scene_height - 1) {
        throw Error(ErrorCode::SpecInvalid, "frame " + std::to_string(i) + " leaves the scene raster");
      }
    }
  }
}

/// Deterministic for a given seed. Color casts and noise are applied after
/// the geometric sampling, then frames are quantized to 8 bits.
inline SyntheticSequence generate_sequence(const SceneSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  SyntheticSequence seq;
  seq.scene = detail::make_texture(rng, spec.scene_width, spec.scene_height, spec);
  if (spec.parallax) seq.foreground = detail::make_texture(rng, spec.scene_width, spec.scene_height, spec);
  seq.frame_to_scene = frame_to_scene_transforms(spec);

  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < spec.frame_count; ++i) {
    const ColorCast cast = i < static_cast<int>(spec.casts.size()) ? spec.casts[i] : ColorCast{};
    const Homography& a = seq.frame_to_scene[i];
    Rgb8Image rgb(spec.frame_width, spec.frame_height, 3);
    for (int y = 0; y < spec.frame_height; ++y)
      for (int x = 0; x < spec.frame_width; ++x) {
        const Point2 s = a.apply({double(x), double(y)});
        const bool in_band = spec.parallax && s.y >= spec.parallax->y0 && s.y < spec.parallax->y1;
        for (int c = 0; c < 3; ++c) {
          double v = in_band ? sample_bilinear(seq.foreground, s.x + i * spec.parallax->offset_px, s.y, c)
                             : sample_bilinear(seq.scene, s.x, s.y, c);
          v = cast.gain[c] * v + cast.bias[c];
          if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise(rng);
          rgb.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(v * 255.0, 0.0, 255.0) + 0.5);
        }
      }
    seq.frames.emplace_back(static_cast<std::size_t>(i), std::move(rgb));
  }

  const Homography inv0 = seq.frame_to_scene[0].inverse();
  for (int i = 0; i < spec.frame_count; ++i) {
    seq.global.push_back(inv0 * seq.frame_to_scene[i]);
    if (i > 0) seq.pairwise.push_back(seq.frame_to_scene[i - 1].inverse() * seq.frame_to_scene[i]);
  }
  return seq;
}

/// Spec file keys mirror SceneSpec field names; `cast.N = gR,gG,gB,bR,bG,bB`
/// and `parallax = y0,y1,offset`.
inline SceneSpec parse_scene_spec(const KeyValueConfig& kv) {
  SceneSpec spec;
  kv.get("seed", spec.seed);
  kv.get("scene_width", spec.scene_width);
  kv.get("scene_height", spec.scene_height);
  kv.get("frame_width", spec.frame_width);
  kv.get("frame_height", spec.frame_height);
  kv.get("frame_count", spec.frame_count);
  kv.get("origin_x", spec.origin.x);
  kv.get("origin_y", spec.origin.y);
  kv.get("step_x", spec.step.x);
  kv.get("step_y", spec.step.y);
  kv.get("texture_sigma", spec.texture_sigma);
  kv.get("texture_coarse_sigma", spec.texture_coarse_sigma);
  kv.get("texture_fine_weight", spec.texture_fine_weight);
  kv.get("texture_contrast", spec.texture_contrast);
  kv.get("noise_sigma", spec.noise_sigma);
  for (int i = 0; i < spec.frame_count; ++i) {
    const std::string key = "cast." + std::to_string(i);
    if (!kv.has(key)) continue;
    const auto v = kv.get_list(key);
    if (v.size() != 6) throw Error(ErrorCode::SpecInvalid, key + " needs 6 values");
    if (static_cast<int>(spec.casts.size()) <= i) spec.casts.resize(i + 1);
    spec.casts[i] = ColorCast{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
  }
  if (kv.has("parallax")) {
    const auto v = kv.get_list("parallax");
    if (v.size() != 3) throw Error(ErrorCode::SpecInvalid, "parallax needs y0,y1,offset");
    spec.parallax = ParallaxBand{static_cast<int>(v[0]), static_cast<int>(v[1]), v[2]};
  }
  kv.require_all_used();
  return spec;
}

/// Ground-truth rendering of the scene background seen through frame 0's
/// coordinate system shifted by `offset` (canvas -> frame 0 translation).
inline RealImage render_ground_truth(const SyntheticSequence& seq, int width, int height, Point2 offset) {
  RealImage out(width, height, 3, 0.0);
  const Homography& a0 = seq.frame_to_scene[0];
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const Point2 s = a0.apply({x - offset.x, y - offset.y});
      if (s.x < 0 || s.y < 0 || s.x > seq.scene.width() - 1 || s.y > seq.scene.height() - 1) continue;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = sample_bilinear(seq.scene, s.x, s.y, c);
    }
  return out;
}

}  // namespace mosaic
