#include "nsdf/scene.hpp"

#include <fstream>
#include <sstream>

namespace nsdf {

namespace {

SdfValue sphere_sdf(const Sphere& s, const Vec3d& x) {
  const Vec3d r = x - s.center;
  const double n = r.norm();
  SdfValue v;
  v.dist = n - s.radius;
  v.grad = n > 0 ? Vec3d(r / n) : Vec3d::UnitX();
  return v;
}

SdfValue box_sdf(const Box& b, const Vec3d& x) {
  const Vec3d r = x - b.center;
  const Vec3d q = r.cwiseAbs() - b.half;
  SdfValue v;
  const Vec3d qpos = q.cwiseMax(0.0);
  const double outside = qpos.norm();
  if (outside > 0) {
    v.dist = outside;
    Vec3d g = qpos / outside;
    for (int i = 0; i < 3; ++i) g[i] *= (r[i] >= 0 ? 1.0 : -1.0);
    v.grad = g;
  } else {
    int axis = 0;
    for (int i = 1; i < 3; ++i)
      if (q[i] > q[axis]) axis = i;
    v.dist = q[axis];
    Vec3d g = Vec3d::Zero();
    g[axis] = r[axis] >= 0 ? 1.0 : -1.0;
    v.grad = g;
  }
  return v;
}

}  // namespace

SdfValue primitive_sdf(const Primitive& prim, const Vec3d& x) {
  return std::visit(
      [&](const auto& p) -> SdfValue {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return sphere_sdf(p, x);
        } else if constexpr (std::is_same_v<T, Box>) {
          return box_sdf(p, x);
        } else if constexpr (std::is_same_v<T, RoomShell>) {
          SdfValue v = box_sdf(Box{p.center, p.half}, x);
          v.dist = -v.dist;
          v.grad = -v.grad;
          return v;
        } else {
          SdfValue v;
          v.dist = p.normal.dot(x) - p.offset;
          v.grad = p.normal;
          return v;
        }
      },
      prim);
}

void Scene::validate() const {
  if (primitives.empty()) throw std::invalid_argument("scene: no primitives");
  if ((bounds.extent().array() <= 0).any())
    throw std::invalid_argument("scene: empty bounds");
  for (const auto& prim : primitives)
    std::visit(
        [](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere>) {
            if (p.radius <= 0) throw std::invalid_argument("scene: sphere radius <= 0");
          } else if constexpr (std::is_same_v<T, Box> || std::is_same_v<T, RoomShell>) {
            if ((p.half.array() <= 0).any())
              throw std::invalid_argument("scene: box half extents <= 0");
          } else {
            if (std::abs(p.normal.norm() - 1.0) > 1e-9)
              throw std::invalid_argument("scene: plane normal must be unit length");
          }
        },
        prim);
}

SdfValue scene_sdf(const Scene& scene, const Vec3d& x) {
  SdfValue best;
  best.dist = std::numeric_limits<double>::infinity();
  for (const auto& prim : scene.primitives) {
    const SdfValue v = primitive_sdf(prim, x);
    if (v.dist < best.dist) best = v;
  }
  return best;
}

double scene_distance(const Scene& scene, const Vec3d& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& prim : scene.primitives)
    best = std::min(best, primitive_sdf(prim, x).dist);
  return best;
}

namespace {

Vec3d read_vec3(std::istringstream& ss, int line_no, const char* what) {
  Vec3d v;
  if (!(ss >> v.x() >> v.y() >> v.z()))
    throw std::runtime_error("scene line " + std::to_string(line_no) +
                             ": expected 3 numbers after '" + what + "'");
  return v;
}

void expect_token(std::istringstream& ss, const std::string& want, int line_no) {
  std::string tok;
  if (!(ss >> tok) || tok != want)
    throw std::runtime_error("scene line " + std::to_string(line_no) +
                             ": expected token '" + want + "'");
}

}  // namespace

Scene parse_scene(const std::string& text) {
  Scene scene;
  bool have_bounds = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    if (kind == "bounds") {
      scene.bounds.min = read_vec3(ss, line_no, "bounds");
      scene.bounds.max = read_vec3(ss, line_no, "bounds");
      have_bounds = true;
    } else if (kind == "sphere") {
      Sphere s;
      expect_token(ss, "center", line_no);
      s.center = read_vec3(ss, line_no, "center");
      expect_token(ss, "radius", line_no);
      if (!(ss >> s.radius))
        throw std::runtime_error("scene line " + std::to_string(line_no) +
                                 ": expected radius value");
      scene.primitives.emplace_back(s);
    } else if (kind == "box" || kind == "roomshell") {
      Vec3d center, half;
      expect_token(ss, "center", line_no);
      center = read_vec3(ss, line_no, "center");
      expect_token(ss, "half", line_no);
      half = read_vec3(ss, line_no, "half");
      if (kind == "box")
        scene.primitives.emplace_back(Box{center, half});
      else
        scene.primitives.emplace_back(RoomShell{center, half});
    } else if (kind == "plane") {
      Plane p;
      expect_token(ss, "normal", line_no);
      p.normal = read_vec3(ss, line_no, "normal").normalized();
      expect_token(ss, "offset", line_no);
      if (!(ss >> p.offset))
        throw std::runtime_error("scene line " + std::to_string(line_no) +
                                 ": expected offset value");
      scene.primitives.emplace_back(p);
    } else {
      throw std::runtime_error("scene line " + std::to_string(line_no) +
                               ": unknown primitive '" + kind + "'");
    }
  }
  if (!have_bounds)
    throw std::runtime_error("scene: missing 'bounds' line");
  scene.validate();
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open scene file: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scene(ss.str());
}

std::string serialize_scene(const Scene& scene) {
  std::ostringstream os;
  os.precision(12);
  os << "bounds " << scene.bounds.min.transpose() << " "
     << scene.bounds.max.transpose() << "\n";
  for (const auto& prim : scene.primitives)
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Sphere>) {
            os << "sphere center " << p.center.transpose() << " radius "
               << p.radius << "\n";
          } else if constexpr (std::is_same_v<T, Box>) {
            os << "box center " << p.center.transpose() << " half "
               << p.half.transpose() << "\n";
          } else if constexpr (std::is_same_v<T, RoomShell>) {
            os << "roomshell center " << p.center.transpose() << " half "
               << p.half.transpose() << "\n";
          } else {
            os << "plane normal " << p.normal.transpose() << " offset "
               << p.offset << "\n";
          }
        },
        prim);
  return os.str();
}

void save_scene(const std::string& path, const Scene& scene) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write scene file: " + path);
  os << serialize_scene(scene);
}

Scene make_room1() {
  Scene s;
  s.bounds.min = Vec3d(-3.0, -2.0, 0.0);
  s.bounds.max = Vec3d(3.0, 2.0, 2.5);
  s.primitives.emplace_back(RoomShell{Vec3d(0.0, 0.0, 1.25), Vec3d(3.0, 2.0, 1.25)});
  s.primitives.emplace_back(Box{Vec3d(0.8, 0.0, 0.35), Vec3d(0.6, 0.4, 0.35)});   // table
  s.primitives.emplace_back(Sphere{Vec3d(-1.0, 0.6, 0.3), 0.3});                  // ball
  s.primitives.emplace_back(Box{Vec3d(0.85, 0.2, 0.75), Vec3d(0.05, 0.05, 0.05)});  // cube on the table
  return s;
}

}  // namespace nsdf
