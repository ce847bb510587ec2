#include "nsdf/mesh.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace nsdf {

namespace {

// Cube corners: bit 0 -> +x, bit 1 -> +y, bit 2 -> +z.
constexpr int kEdgeCorner[12][2] = {
    {0, 1}, {2, 3}, {4, 5}, {6, 7},  // x-aligned
    {0, 2}, {1, 3}, {4, 6}, {5, 7},  // y-aligned
    {0, 4}, {1, 5}, {2, 6}, {3, 7},  // z-aligned
};

// Faces with corners in cyclic order.
constexpr int kFaceCorner[6][4] = {
    {0, 2, 6, 4},  // x = 0
    {1, 5, 7, 3},  // x = 1
    {0, 4, 5, 1},  // y = 0
    {2, 3, 7, 6},  // y = 1
    {0, 1, 3, 2},  // z = 0
    {4, 6, 7, 5},  // z = 1
};

int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e) {
    if ((kEdgeCorner[e][0] == a && kEdgeCorner[e][1] == b) ||
        (kEdgeCorner[e][0] == b && kEdgeCorner[e][1] == a))
      return e;
  }
  return -1;
}

struct CellSegments {
  // Directed isoline segments on the cube faces (start edge -> end edge).
  // The face traversal order in kFaceCorner is coherent (right-hand normals
  // point into the cube), so directing each segment from its exit crossing
  // (inside -> outside) to an entry crossing (outside -> inside) makes every
  // traced cycle wind with its normal toward the positive side of the field.
  std::vector<std::pair<int, int>> segments;
};

void face_segments(const std::array<double, 8>& v, CellSegments& out) {
  for (const auto& face : kFaceCorner) {
    bool inside[4];
    for (int i = 0; i < 4; ++i) inside[i] = v[static_cast<size_t>(face[i])] < 0;
    int cut_edge[4];  // cube edge id per face-edge slot, -1 when uncut
    int n_cut = 0;
    for (int i = 0; i < 4; ++i) {
      const int j = (i + 1) & 3;
      cut_edge[i] = inside[i] != inside[j] ? edge_between(face[i], face[j]) : -1;
      n_cut += cut_edge[i] >= 0;
    }
    if (n_cut == 2) {
      int exit_e = -1, entry_e = -1;
      for (int i = 0; i < 4; ++i) {
        if (cut_edge[i] < 0) continue;
        (inside[i] ? exit_e : entry_e) = cut_edge[i];
      }
      out.segments.emplace_back(exit_e, entry_e);
    } else if (n_cut == 4) {
      // Diagonal face. The asymptotic decider joins the two inside corners
      // through the face when the bilinear saddle value is negative; the
      // decision depends only on the four corner values, so both incident
      // cells and both field signs resolve it consistently.
      const double va = v[static_cast<size_t>(face[0])];
      const double vb = v[static_cast<size_t>(face[1])];
      const double vc = v[static_cast<size_t>(face[2])];
      const double vd = v[static_cast<size_t>(face[3])];
      const bool joined = (va * vc - vb * vd) / (va + vc - vb - vd) < 0;
      for (int i = 0; i < 4; ++i) {
        if (!(inside[i] && cut_edge[i] >= 0)) continue;  // exits only
        // Pair this corner's exit with its own entry (separated) or with the
        // entry of the opposite inside corner (joined).
        const int entry_slot = joined ? (i + 1) & 3 : (i + 3) & 3;
        out.segments.emplace_back(cut_edge[i], cut_edge[entry_slot]);
      }
    }
  }
}

std::vector<std::vector<int>> trace_cycles(const CellSegments& cell) {
  // Every cut edge starts exactly one directed segment and ends exactly one;
  // following successors yields the oriented polygon cycles.
  std::array<int, 12> next{};
  next.fill(-1);
  for (const auto& [a, b] : cell.segments) {
    if (next[static_cast<size_t>(a)] != -1)
      throw std::logic_error("marching_cubes: duplicate segment start");
    next[static_cast<size_t>(a)] = b;
  }
  std::vector<std::vector<int>> cycles;
  std::array<bool, 12> used{};
  for (int start = 0; start < 12; ++start) {
    if (next[static_cast<size_t>(start)] < 0 || used[static_cast<size_t>(start)])
      continue;
    std::vector<int> cycle;
    int cur = start;
    do {
      used[static_cast<size_t>(cur)] = true;
      cycle.push_back(cur);
      cur = next[static_cast<size_t>(cur)];
      if (cur < 0) throw std::logic_error("marching_cubes: broken cycle");
    } while (cur != start);
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

uint64_t edge_key(int ix, int iy, int iz, int axis) {
  return (static_cast<uint64_t>(axis) << 60) |
         (static_cast<uint64_t>(static_cast<uint32_t>(ix)) << 40) |
         (static_cast<uint64_t>(static_cast<uint32_t>(iy)) << 20) |
         static_cast<uint64_t>(static_cast<uint32_t>(iz));
}

}  // namespace

TriMesh marching_cubes(const ScalarField& field, const Aabb& bounds,
                       double resolution) {
  if (resolution <= 0)
    throw std::invalid_argument("marching_cubes: resolution must be positive");
  Eigen::Vector3i n;  // sample points per axis
  for (int k = 0; k < 3; ++k)
    n[k] = std::max(2, static_cast<int>(std::ceil(bounds.extent()[k] / resolution)) + 1);

  auto sample_pos = [&](int i, int j, int k) {
    return Vec3d(bounds.min.x() + i * bounds.extent().x() / (n.x() - 1),
                 bounds.min.y() + j * bounds.extent().y() / (n.y() - 1),
                 bounds.min.z() + k * bounds.extent().z() / (n.z() - 1));
  };

  std::vector<double> values(static_cast<size_t>(n.x()) * n.y() * n.z());
  auto vidx = [&](int i, int j, int k) {
    return (static_cast<size_t>(k) * n.y() + j) * n.x() + i;
  };
  for (int k = 0; k < n.z(); ++k)
    for (int j = 0; j < n.y(); ++j)
      for (int i = 0; i < n.x(); ++i)
        values[vidx(i, j, k)] = field(sample_pos(i, j, k));

  TriMesh mesh;
  std::unordered_map<uint64_t, int> vertex_of_edge;

  auto vertex_on = [&](int i0, int j0, int k0, int axis) {
    const uint64_t key = edge_key(i0, j0, k0, axis);
    const auto it = vertex_of_edge.find(key);
    if (it != vertex_of_edge.end()) return it->second;
    int i1 = i0 + (axis == 0), j1 = j0 + (axis == 1), k1 = k0 + (axis == 2);
    const double v0 = values[vidx(i0, j0, k0)];
    const double v1 = values[vidx(i1, j1, k1)];
    const double t = v0 / (v0 - v1);
    const Vec3d p = sample_pos(i0, j0, k0) +
                    t * (sample_pos(i1, j1, k1) - sample_pos(i0, j0, k0));
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(p);
    vertex_of_edge.emplace(key, id);
    return id;
  };

  for (int k = 0; k + 1 < n.z(); ++k)
    for (int j = 0; j + 1 < n.y(); ++j)
      for (int i = 0; i + 1 < n.x(); ++i) {
        std::array<double, 8> v;
        for (int c = 0; c < 8; ++c)
          v[static_cast<size_t>(c)] =
              values[vidx(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1))];
        int inside_count = 0;
        for (double vv : v) inside_count += vv < 0;
        if (inside_count == 0 || inside_count == 8) continue;

        CellSegments cell;
        face_segments(v, cell);
        const auto cycles = trace_cycles(cell);

        for (const auto& cycle : cycles) {
          if (cycle.size() < 3) continue;
          std::vector<int> ids;
          ids.reserve(cycle.size());
          for (int e : cycle) {
            const int c0 = kEdgeCorner[e][0];
            const int axis = e < 4 ? 0 : (e < 8 ? 1 : 2);
            ids.push_back(vertex_on(i + ((c0 >> 0) & 1), j + ((c0 >> 1) & 1),
                                    k + ((c0 >> 2) & 1), axis));
          }
          for (size_t a = 1; a + 1 < ids.size(); ++a)
            mesh.triangles.emplace_back(ids[0], ids[a], ids[a + 1]);
        }
      }
  return mesh;
}

void write_ply(const std::string& path, const TriMesh& mesh) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open ply for write: " + path);
  std::fprintf(f,
               "ply\nformat ascii 1.0\nelement vertex %zu\n"
               "property float x\nproperty float y\nproperty float z\n"
               "element face %zu\nproperty list uchar int vertex_indices\n"
               "end_header\n",
               mesh.vertices.size(), mesh.triangles.size());
  for (const Vec3d& v : mesh.vertices)
    std::fprintf(f, "%.6f %.6f %.6f\n", v.x(), v.y(), v.z());
  for (const auto& t : mesh.triangles)
    std::fprintf(f, "3 %d %d %d\n", t.x(), t.y(), t.z());
  std::fclose(f);
}

TriMesh read_ply(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open ply: " + path);
  std::string line;
  size_t n_vert = 0, n_face = 0;
  bool header_done = false;
  while (std::getline(is, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "element") {
      std::string what;
      size_t count;
      ss >> what >> count;
      if (what == "vertex") n_vert = count;
      if (what == "face") n_face = count;
    } else if (tok == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw std::runtime_error("ply: missing end_header: " + path);
  TriMesh mesh;
  mesh.vertices.resize(n_vert);
  for (size_t i = 0; i < n_vert; ++i) {
    if (!(is >> mesh.vertices[i].x() >> mesh.vertices[i].y() >>
          mesh.vertices[i].z()))
      throw std::runtime_error("ply: truncated vertex list: " + path);
  }
  mesh.triangles.reserve(n_face);
  for (size_t i = 0; i < n_face; ++i) {
    int n = 0;
    if (!(is >> n)) throw std::runtime_error("ply: truncated face list: " + path);
    std::vector<int> ids(static_cast<size_t>(n));
    for (int& id : ids)
      if (!(is >> id)) throw std::runtime_error("ply: truncated face: " + path);
    for (int a = 1; a + 1 < n; ++a)
      mesh.triangles.emplace_back(ids[0], ids[static_cast<size_t>(a)],
                                  ids[static_cast<size_t>(a) + 1]);
  }
  return mesh;
}

ManifoldReport analyze_manifold(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> edge_use;
  for (const auto& t : mesh.triangles) {
    const int v[3] = {t.x(), t.y(), t.z()};
    for (int e = 0; e < 3; ++e) {
      const int a = v[e], b = v[(e + 1) % 3];
      edge_use[{std::min(a, b), std::max(a, b)}]++;
    }
  }
  ManifoldReport r;
  for (const auto& [edge, uses] : edge_use) {
    if (uses == 1) ++r.boundary_edges;
    if (uses > 2) ++r.nonmanifold_edges;
  }
  r.closed = r.boundary_edges == 0 && r.nonmanifold_edges == 0 &&
             !mesh.triangles.empty();
  r.euler_characteristic = static_cast<Eigen::Index>(mesh.vertices.size()) -
                           static_cast<Eigen::Index>(edge_use.size()) +
                           static_cast<Eigen::Index>(mesh.triangles.size());
  return r;
}

}  // namespace nsdf
