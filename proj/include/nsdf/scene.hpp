#pragma once

#include <string>
#include <variant>
#include <vector>

#include "nsdf/common.hpp"

namespace nsdf {

struct Sphere {
  Vec3d center = Vec3d::Zero();
  double radius = 1.0;
};

struct Box {
  Vec3d center = Vec3d::Zero();
  Vec3d half = Vec3d::Ones();
};

// A box with inward-facing walls: positive inside, negative in the walls and
// outside. Used as the room envelope.
struct RoomShell {
  Vec3d center = Vec3d::Zero();
  Vec3d half = Vec3d::Ones();
};

struct Plane {
  Vec3d normal = Vec3d::UnitZ();  // unit
  double offset = 0.0;            // sdf = n.x - offset
};

using Primitive = std::variant<Sphere, Box, RoomShell, Plane>;

struct SdfValue {
  double dist = 0;
  Vec3d grad = Vec3d::Zero();
};

SdfValue primitive_sdf(const Primitive& prim, const Vec3d& x);

struct Aabb {
  Vec3d min = Vec3d::Zero();
  Vec3d max = Vec3d::Zero();

  Vec3d center() const { return 0.5 * (min + max); }
  Vec3d extent() const { return max - min; }
  bool contains(const Vec3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

// Min-composition of primitives; ties go to the lowest primitive index.
struct Scene {
  std::vector<Primitive> primitives;
  Aabb bounds;

  void validate() const;
};

SdfValue scene_sdf(const Scene& scene, const Vec3d& x);
double scene_distance(const Scene& scene, const Vec3d& x);

// Plain-text scene description (one primitive per line, '#' comments):
//   bounds    <min xyz> <max xyz>
//   sphere    center <xyz> radius <r>
//   box       center <xyz> half <xyz>
//   roomshell center <xyz> half <xyz>
//   plane     normal <xyz> offset <d>
Scene parse_scene(const std::string& text);
Scene load_scene(const std::string& path);
std::string serialize_scene(const Scene& scene);
void save_scene(const std::string& path, const Scene& scene);

// The committed acceptance scene: a 6 x 4 x 2.5 m room containing a table,
// a ball and a small cube on the table.
Scene make_room1();

}  // namespace nsdf
