#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsdf/camera.hpp"
#include "nsdf/scene.hpp"

namespace nsdf {

enum class DepthFormat { kU16, kF32 };

// Directory layout:
//   meta            key-value text: image size, intrinsics, depth format and
//                   scale, scene bounds, frame count, fps
//   poses.txt       one row-major 4x4 T_WC per line, frame-ordered
//   depth_%06d.pgm  16-bit PGM, millimetres, 0 = invalid   (u16 format)
//   depth_%06d.f32  raw little-endian float32 row-major    (f32 format)
//   scene.txt       optional analytic scene for ground truth
struct Dataset {
  Intrinsics intrinsics;
  Aabb bounds;
  std::vector<DepthFrame> frames;
  std::optional<Scene> scene;
  DepthFormat format = DepthFormat::kU16;
  double fps = 30.0;
};

void write_dataset(const std::string& dir, const Dataset& dataset);
Dataset read_dataset(const std::string& dir);

}  // namespace nsdf
